from typing import NamedTuple, Sequence

import numpy as np
from pydantic import BaseModel, Field

from tabreg.table.model import SpatialQuad


class PRF(NamedTuple):
    precision: float
    recall: float
    f1: float


def f1_score(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


class Counts(BaseModel):
    """True positives against prediction / ground-truth totals; adds up across tables."""

    tp: int = 0
    n_pred: int = 0
    n_gt: int = 0

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(tp=self.tp + other.tp, n_pred=self.n_pred + other.n_pred, n_gt=self.n_gt + other.n_gt)

    def prf(self, empty_is_perfect: bool = False) -> PRF:
        if empty_is_perfect and self.n_pred == 0 and self.n_gt == 0:
            return PRF(1.0, 1.0, 1.0)
        p = self.tp / self.n_pred if self.n_pred else 0.0
        r = self.tp / self.n_gt if self.n_gt else 0.0
        return PRF(p, r, f1_score(p, r))


class MatchResult(BaseModel):
    """One-to-one matching; ids are positions in the pred / gt sequences."""

    pairs: list[tuple[int, int, float]] = Field(default_factory=list)
    unmatched_pred: list[int] = Field(default_factory=list)
    unmatched_gt: list[int] = Field(default_factory=list)

    def pred_to_gt(self) -> dict[int, int]:
        return {p: g for p, g, _ in self.pairs}

    def gt_to_pred(self) -> dict[int, int]:
        return {g: p for p, g, _ in self.pairs}

    @property
    def counts(self) -> Counts:
        n = len(self.pairs)
        return Counts(tp=n, n_pred=n + len(self.unmatched_pred), n_gt=n + len(self.unmatched_gt))


def _boxes(quads: Sequence[SpatialQuad]) -> np.ndarray:
    if not quads:
        return np.zeros((0, 4))
    return np.array([q.bbox() for q in quads], dtype=np.float64)


def iou_matrix(pred: Sequence[SpatialQuad], gt: Sequence[SpatialQuad]) -> np.ndarray:
    """IoU of the axis-aligned bounding boxes, shape (len(pred), len(gt))."""
    a, b = _boxes(pred), _boxes(gt)
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    ix0 = np.maximum(a[:, None, 0], b[None, :, 0])
    iy0 = np.maximum(a[:, None, 1], b[None, :, 1])
    ix1 = np.minimum(a[:, None, 2], b[None, :, 2])
    iy1 = np.minimum(a[:, None, 3], b[None, :, 3])
    inter = np.clip(ix1 - ix0, 0, None) * np.clip(iy1 - iy0, 0, None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        iou = np.where(union > 0, inter / union, 0.0)
    return iou


def match_cells(pred: Sequence[SpatialQuad], gt: Sequence[SpatialQuad], iou_threshold: float = 0.5) -> MatchResult:
    """Greedy matching in descending IoU; ties broken by (pred_id, gt_id).

    A pair qualifies only when its IoU is strictly above the threshold.
    """
    if not 0 < iou_threshold <= 1:
        raise ValueError(f"iou_threshold must be in (0, 1], got {iou_threshold}")
    iou = iou_matrix(pred, gt)
    candidates = [
        (-float(iou[i, j]), i, j)
        for i, j in zip(*np.nonzero(iou > iou_threshold))
    ]
    candidates.sort()

    used_pred: set[int] = set()
    used_gt: set[int] = set()
    pairs: list[tuple[int, int, float]] = []
    for neg_iou, i, j in candidates:
        if i in used_pred or j in used_gt:
            continue
        used_pred.add(int(i))
        used_gt.add(int(j))
        pairs.append((int(i), int(j), -neg_iou))

    pairs.sort(key=lambda p: (p[0], p[1]))
    return MatchResult(
        pairs=pairs,
        unmatched_pred=[i for i in range(len(pred)) if i not in used_pred],
        unmatched_gt=[j for j in range(len(gt)) if j not in used_gt],
    )


def detection_f1(m: MatchResult) -> PRF:
    return m.counts.prf()
