"""Word boxes, 1-D gap clustering onto grid indices, and pairwise distance labels."""
import statistics
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, NonNegativeInt

from tabreg.utils import SeedLike, as_generator


class WordBox(BaseModel):
    box: tuple[float, float, float, float] = Field(description="x0, y0, x1, y1 in pixels")
    grid_row: NonNegativeInt
    grid_col: NonNegativeInt
    cell_id: int

    @property
    def height(self) -> float:
        return self.box[3] - self.box[1]


class LdpPairLabel(BaseModel):
    a: NonNegativeInt
    b: NonNegativeInt
    row_dist: int
    col_dist: int


def cluster_to_grid(centers: Sequence[float], gap_threshold: float) -> list[int]:
    """Index of each center's cluster; a new cluster opens when the sorted gap exceeds the threshold."""
    if not centers:
        raise ValueError("cluster_to_grid needs at least one center")
    if gap_threshold <= 0:
        raise ValueError(f"gap_threshold must be > 0, got {gap_threshold}")
    order = np.argsort(np.asarray(centers, dtype=np.float64), kind="stable")
    out = [0] * len(centers)
    index = 0
    prev = centers[order[0]]
    for pos in order:
        if centers[pos] - prev > gap_threshold:
            index += 1
        out[pos] = index
        prev = centers[pos]
    return out


def cluster_word_grid(words: Sequence[WordBox], gap_threshold: Optional[float] = None) -> list[WordBox]:
    """Relabel words from clustering of each cell's text-block anchor.

    The anchor is the top-left corner of the union of a cell's word boxes, so
    all words of one cell (spanning or not) land on one grid slot.
    """
    if not words:
        return []
    if gap_threshold is None:
        gap_threshold = 0.6 * statistics.median(w.height for w in words)

    anchors: dict[int, tuple[float, float]] = {}
    for w in words:
        x, y = anchors.get(w.cell_id, (w.box[0], w.box[1]))
        anchors[w.cell_id] = (min(x, w.box[0]), min(y, w.box[1]))
    cell_ids = list(anchors)
    cols = cluster_to_grid([anchors[c][0] for c in cell_ids], gap_threshold)
    rows = cluster_to_grid([anchors[c][1] for c in cell_ids], gap_threshold)
    slot = {c: (r, k) for c, r, k in zip(cell_ids, rows, cols)}
    return [w.model_copy(update={"grid_row": slot[w.cell_id][0], "grid_col": slot[w.cell_id][1]}) for w in words]


def ldp_labels(words: Sequence[WordBox], max_pairs: int, seed: SeedLike) -> list[LdpPairLabel]:
    """Up to ``max_pairs`` ordered pairs (identity pairs included), without replacement."""
    n = len(words)
    if n == 0 or max_pairs <= 0:
        return []
    rng = as_generator(seed, "ldp")
    total = n * n
    picks = np.sort(rng.choice(total, size=min(max_pairs, total), replace=False))
    out = []
    for flat in picks.tolist():
        a, b = divmod(flat, n)
        out.append(LdpPairLabel(
            a=a,
            b=b,
            row_dist=words[a].grid_row - words[b].grid_row,
            col_dist=words[a].grid_col - words[b].grid_col,
        ))
    return out
