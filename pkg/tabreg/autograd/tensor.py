"""Dense float64 tensors with tape-based reverse-mode differentiation.

Each op builds its output and, when any input requires grad, a closure that
pushes the output gradient back to its inputs. ``Tensor.backward`` walks the
graph in reverse topological order.
"""
import threading
from contextlib import contextmanager
from typing import Callable, Iterator, Optional, Sequence

import numpy as np


class ShapeError(ValueError):
    def __init__(self, op: str, shapes: Sequence[tuple[int, ...]], detail: str = "") -> None:
        self.op = op
        self.shapes = [tuple(s) for s in shapes]
        msg = f"{op}: incompatible shapes {self.shapes}"
        super().__init__(f"{msg} ({detail})" if detail else msg)


class _TapeState(threading.local):
    def __init__(self) -> None:
        self.grad_enabled = True
        self.op_count = 0
        self.kinks: Optional[list[np.ndarray]] = None


_state = _TapeState()


@contextmanager
def no_grad() -> Iterator[None]:
    prev = _state.grad_enabled
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = prev


class OpCounter:
    """Counts ops executed on this thread inside the ``with`` block."""

    def __init__(self) -> None:
        self.count = 0
        self._start = 0

    def __enter__(self) -> "OpCounter":
        self._start = _state.op_count
        return self

    def __exit__(self, *exc) -> None:
        self.count = _state.op_count - self._start


@contextmanager
def record_kinks() -> Iterator[list[np.ndarray]]:
    """Collect the branch pattern of every relu / hinge / abs evaluated inside the block."""
    prev = _state.kinks
    log: list[np.ndarray] = []
    _state.kinks = log
    try:
        yield log
    finally:
        _state.kinks = prev


def _note_kink(pattern: np.ndarray) -> None:
    if _state.kinks is not None:
        _state.kinks.append(pattern)


class Tensor:
    __array_priority__ = 1000

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None) -> None:
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._parents: tuple["Tensor", ...] = ()
        self._grad_fn: Optional[Callable[[np.ndarray], None]] = None
        self._op = ""

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError("item", [self.shape], "not a scalar")
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    def backward(self) -> None:
        if self.data.size != 1:
            raise ShapeError("backward", [self.shape], "loss must be a scalar")
        if not self.requires_grad:
            return
        topo: list[Tensor] = []
        visited: set[int] = set()
        # iterative post-order over nodes that require grad
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in visited:
                    stack.append((p, False))

        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._grad_fn is not None and node.grad is not None:
                node._grad_fn(node.grad)

    def __add__(self, other) -> "Tensor":
        return add(self, other)

    def __radd__(self, other) -> "Tensor":
        return add(other, self)

    def __sub__(self, other) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other) -> "Tensor":
        if isinstance(other, (int, float)):
            return scalar_mul(self, other)
        return mul(self, other)

    def __rmul__(self, other) -> "Tensor":
        return self.__mul__(other)

    def __neg__(self) -> "Tensor":
        return scalar_mul(self, -1.0)

    def __matmul__(self, other) -> "Tensor":
        return matmul(self, other)

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return tsum(self, axis, keepdims)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> "Tensor":
        return mean(self, axis, keepdims)

    def relu(self) -> "Tensor":
        return relu(self)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data: np.ndarray, parents: Sequence[Tensor], op: str, grad_fn: Callable[[np.ndarray], None]) -> Tensor:
    _state.op_count += 1
    out = Tensor(data)
    out._op = op
    if _state.grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._grad_fn = grad_fn
    return out


def _accum(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    g = np.asarray(g, dtype=np.float64)
    if g.shape != t.data.shape:
        g = np.broadcast_to(g, t.data.shape)
    t.grad = np.array(g, dtype=np.float64) if t.grad is None else t.grad + g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _check_broadcast(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(op, [a.shape, b.shape]) from None


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("add", a, b)

    def grad_fn(g: np.ndarray) -> None:
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(g, b.shape))

    return _make(a.data + b.data, (a, b), "add", grad_fn)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("sub", a, b)

    def grad_fn(g: np.ndarray) -> None:
        _accum(a, _unbroadcast(g, a.shape))
        _accum(b, _unbroadcast(-g, b.shape))

    return _make(a.data - b.data, (a, b), "sub", grad_fn)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast("mul", a, b)

    def grad_fn(g: np.ndarray) -> None:
        _accum(a, _unbroadcast(g * b.data, a.shape))
        _accum(b, _unbroadcast(g * a.data, b.shape))

    return _make(a.data * b.data, (a, b), "mul", grad_fn)


def scalar_mul(a: Tensor, s: float) -> Tensor:
    s = float(s)

    def grad_fn(g: np.ndarray) -> None:
        _accum(a, g * s)

    return _make(a.data * s, (a,), "scalar_mul", grad_fn)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", [a.shape, b.shape])

    def grad_fn(g: np.ndarray) -> None:
        _accum(a, g @ b.data.T)
        _accum(b, a.data.T @ g)

    return _make(a.data @ b.data, (a, b), "matmul", grad_fn)


def transpose(a: Tensor) -> Tensor:
    if a.ndim != 2:
        raise ShapeError("transpose", [a.shape], "expects a matrix")

    def grad_fn(g: np.ndarray) -> None:
        _accum(a, g.T)

    return _make(a.data.T, (a,), "transpose", grad_fn)


def _positive_part(a: Tensor, op: str) -> Tensor:
    mask = a.data > 0
    _note_kink(mask.copy())

    def grad_fn(g: np.ndarray) -> None:
        _accum(a, g * mask)

    return _make(a.data * mask, (a,), op, grad_fn)


def relu(a: Tensor) -> Tensor:
    return _positive_part(a, "relu")


def max_with_zero(a: Tensor) -> Tensor:
    """Hinge ``max(x, 0)``; subgradient 0 at the kink."""
    return _positive_part(a, "max_with_zero")


def abs_sum(a: Tensor) -> Tensor:
    """L1 norm of all entries; subgradient 0 where an entry is exactly 0."""
    sign = np.sign(a.data)
    _note_kink(sign.copy())

    def grad_fn(g: np.ndarray) -> None:
        _accum(a, g * sign)

    return _make(np.abs(a.data).sum(), (a,), "abs_sum", grad_fn)


def softmax_lastdim(a: Tensor) -> Tensor:
    z = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=-1, keepdims=True)

    def grad_fn(g: np.ndarray) -> None:
        _accum(a, y * (g - (g * y).sum(axis=-1, keepdims=True)))

    return _make(y, (a,), "softmax_lastdim", grad_fn)


def concat_lastdim(parts: Sequence[Tensor]) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    if not parts:
        raise ShapeError("concat_lastdim", [], "nothing to concatenate")
    lead = parts[0].shape[:-1]
    if any(p.shape[:-1] != lead for p in parts):
        raise ShapeError("concat_lastdim", [p.shape for p in parts])
    bounds = np.cumsum([0] + [p.shape[-1] for p in parts])

    def grad_fn(g: np.ndarray) -> None:
        for p, lo, hi in zip(parts, bounds[:-1], bounds[1:]):
            _accum(p, g[..., lo:hi])

    return _make(np.concatenate([p.data for p in parts], axis=-1), parts, "concat_lastdim", grad_fn)


def slice_lastdim(a: Tensor, start: int, stop: int) -> Tensor:
    width = a.shape[-1]
    if not 0 <= start < stop <= width:
        raise ShapeError("slice_lastdim", [a.shape], f"range {start}:{stop}")

    def grad_fn(g: np.ndarray) -> None:
        full = np.zeros_like(a.data)
        full[..., start:stop] = g
        _accum(a, full)

    return _make(a.data[..., start:stop], (a,), "slice_lastdim", grad_fn)


def gather_rows(a: Tensor, index) -> Tensor:
    """Rows of ``a`` at ``index`` (repeats allowed); gradients scatter-add back."""
    idx = np.asarray(index, dtype=np.int64)
    if idx.ndim != 1 or (idx.size and (idx.min() < 0 or idx.max() >= a.shape[0])):
        raise ShapeError("gather_rows", [a.shape, idx.shape], "index out of range")

    def grad_fn(g: np.ndarray) -> None:
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        _accum(a, full)

    return _make(a.data[idx], (a,), "gather_rows", grad_fn)


embedding_lookup = gather_rows


def tsum(a: Tensor, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def grad_fn(g: np.ndarray) -> None:
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        _accum(a, np.broadcast_to(g, a.shape))

    return _make(data, (a,), "sum", grad_fn)


def mean(a: Tensor, axis: Optional[int] = None, keepdims: bool = False) -> Tensor:
    count = a.data.size if axis is None else a.shape[axis]
    return scalar_mul(tsum(a, axis, keepdims), 1.0 / max(count, 1))
