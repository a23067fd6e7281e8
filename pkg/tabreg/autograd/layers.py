import math
from typing import Iterator, Mapping, Optional

import numpy as np

from tabreg.autograd.tensor import (
    ShapeError,
    Tensor,
    concat_lastdim,
    matmul,
    relu,
    scalar_mul,
    slice_lastdim,
    softmax_lastdim,
    transpose,
)


class Parameter(Tensor):
    """Trainable tensor plus its Adam moment buffers."""

    def __init__(self, data, name: Optional[str] = None) -> None:
        super().__init__(np.array(data, dtype=np.float64), requires_grad=True, name=name)
        self.m = np.zeros_like(self.data)
        self.v = np.zeros_like(self.data)
        self.step = 0


def uniform_init(rng: np.random.Generator, fan_in: int, shape: tuple[int, ...]) -> np.ndarray:
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Module:
    """Parameters are discovered from attributes: Parameters, Modules and lists of Modules."""

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for attr, value in vars(self).items():
            if isinstance(value, Parameter):
                yield prefix + attr, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{prefix}{attr}.")
            elif isinstance(value, list):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{prefix}{attr}.{i}.")

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: Mapping[str, np.ndarray], strict: bool = True) -> list[str]:
        """Copy values in place; returns the names that were loaded.

        Raises KeyError for missing names (when strict) and ShapeError on mismatch.
        """
        own = dict(self.named_parameters())
        if strict:
            missing = sorted(set(own) - set(state))
            if missing:
                raise KeyError(f"missing parameters: {missing}")
        loaded = []
        for name, value in state.items():
            if name not in own:
                if strict:
                    raise KeyError(f"unexpected parameter: {name}")
                continue
            value = np.asarray(value, dtype=np.float64)
            if value.shape != own[name].shape:
                raise ShapeError(f"load {name}", [own[name].shape, value.shape])
            own[name].data[...] = value
            loaded.append(name)
        return loaded


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, bias: bool = True) -> None:
        self.weight = Parameter(uniform_init(rng, d_in, (d_in, d_out)))
        self.bias = Parameter(uniform_init(rng, d_in, (d_out,))) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        y = matmul(x, self.weight)
        return y + self.bias if self.bias is not None else y


class SelfAttentionBlock(Module):
    """Multi-head scaled dot-product self-attention, residual, 2-layer relu FFN, residual.

    No mask and no normalisation layers; rows are treated as an unordered set.
    """

    def __init__(self, d: int, heads: int, rng: np.random.Generator) -> None:
        if d % heads:
            raise ValueError(f"width {d} not divisible by {heads} heads")
        self.heads = heads
        self.wq = Linear(d, d, rng)
        self.wk = Linear(d, d, rng)
        self.wv = Linear(d, d, rng)
        self.wo = Linear(d, d, rng)
        self.ff1 = Linear(d, 2 * d, rng)
        self.ff2 = Linear(2 * d, d, rng)

    def attend(self, x: Tensor) -> Tensor:
        d = x.shape[-1]
        dk = d // self.heads
        q, k, v = self.wq(x), self.wk(x), self.wv(x)
        outs = []
        for h in range(self.heads):
            lo, hi = h * dk, (h + 1) * dk
            qh, kh, vh = slice_lastdim(q, lo, hi), slice_lastdim(k, lo, hi), slice_lastdim(v, lo, hi)
            weights = softmax_lastdim(scalar_mul(matmul(qh, transpose(kh)), 1.0 / math.sqrt(dk)))
            outs.append(matmul(weights, vh))
        return self.wo(concat_lastdim(outs) if len(outs) > 1 else outs[0])

    def __call__(self, x: Tensor) -> Tensor:
        if x.ndim != 2:
            raise ShapeError("self_attention", [x.shape], "expects N x d")
        x = x + self.attend(x)
        return x + self.ff2(relu(self.ff1(x)))


class Encoder(Module):
    def __init__(self, d: int, heads: int, n_layers: int, rng: np.random.Generator) -> None:
        if n_layers < 1:
            raise ValueError("encoder needs at least one layer")
        self.layers = [SelfAttentionBlock(d, heads, rng) for _ in range(n_layers)]

    def __call__(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x


def multi_head_self_attention(x: Tensor, block: SelfAttentionBlock) -> Tensor:
    return block(x)
