from typing import Literal, NamedTuple, Sequence

import numpy as np

from tabreg.autograd import Tensor, abs_sum, gather_rows, max_with_zero, scalar_mul, slice_lastdim, sub, tsum
from tabreg.model.config import ModelConfig
from tabreg.table.adjacency import directed_adjacency
from tabreg.table.model import Table

RS, RE, CS, CE = 0, 1, 2, 3

Pairs = Sequence[tuple[int, int]]


class LossBreakdown(NamedTuple):
    total: Tensor
    log: float
    inter: float
    intra: float


def gt_array(t: Table) -> np.ndarray:
    return np.array([c.logical.as_tuple() for c in t.cells], dtype=np.float64).reshape(-1, 4)


def build_adjacent_pairs(gt: Table) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """(A_r, A_c) over cell positions: (i, j) with i right of / below j."""
    return directed_adjacency(gt)


def _component(l: Tensor, k: int) -> Tensor:
    return slice_lastdim(l, k, k + 1)


def _hinge(l: Tensor, pairs: Pairs, end_of_j: int, start_of_i: int) -> Tensor:
    i = np.array([p[0] for p in pairs], dtype=np.int64)
    j = np.array([p[1] for p in pairs], dtype=np.int64)
    gap = sub(gather_rows(_component(l, end_of_j), j), gather_rows(_component(l, start_of_i), i))
    return tsum(max_with_zero(gap + 1.0))


def loss_inter(l_stack: Tensor, a_r: Pairs, a_c: Pairs, axis: Literal["ordered", "literal"] = "ordered") -> Tensor:
    """Mutual-exclusion hinge over adjacent pairs.

    ``ordered``: sum over A_r of max(c_e(j) - c_s(i) + 1, 0) plus the row analogue
    over A_c; zero on ground truth. ``literal`` swaps the axes (rows for A_r,
    columns for A_c) and is generally nonzero on ground truth.
    """
    total = Tensor(0.0)
    r_axis, c_axis = ((CE, CS), (RE, RS)) if axis == "ordered" else ((RE, RS), (CE, CS))
    if a_r:
        total = total + _hinge(l_stack, a_r, *r_axis)
    if a_c:
        total = total + _hinge(l_stack, a_c, *c_axis)
    return total


def loss_intra(l_stack: Tensor, gt: np.ndarray) -> Tensor:
    """Span consistency on ground-truth multi-row / multi-column cells."""
    total = Tensor(0.0)
    multi_row = np.nonzero(gt[:, RE] > gt[:, RS])[0]
    multi_col = np.nonzero(gt[:, CE] > gt[:, CS])[0]
    for idx, (s, e) in ((multi_row, (RS, RE)), (multi_col, (CS, CE))):
        if len(idx) == 0:
            continue
        span_pred = sub(gather_rows(_component(l_stack, e), idx), gather_rows(_component(l_stack, s), idx))
        span_gt = (gt[idx, e] - gt[idx, s])[:, None]
        total = total + abs_sum(span_pred - span_gt)
    return total


def loss_log(l_base: Tensor, l_stack: Tensor, gt: np.ndarray) -> Tensor:
    """Mean over cells of the L1 error of both regressors."""
    n = max(len(gt), 1)
    return scalar_mul(abs_sum(l_base - gt) + abs_sum(l_stack - gt), 1.0 / n)


def loss_total(
    l_base: Tensor,
    l_stack: Tensor,
    gt: Table,
    cfg: ModelConfig,
    pairs: tuple[Pairs, Pairs] | None = None,
) -> LossBreakdown:
    target = gt_array(gt)
    a_r, a_c = pairs if pairs is not None else build_adjacent_pairs(gt)
    log_term = loss_log(l_base, l_stack, target)
    total = log_term
    inter = intra = 0.0
    if cfg.enable_inter:
        term = loss_inter(l_stack, a_r, a_c, cfg.inter_axis)
        inter = term.item()
        total = total + term
    if cfg.enable_intra:
        term = loss_intra(l_stack, target)
        intra = term.item()
        total = total + term
    return LossBreakdown(total=total, log=log_term.item(), inter=inter, intra=intra)
