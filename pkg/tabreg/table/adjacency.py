from enum import Enum
from typing import Optional

from tabreg.table.model import LogicalLocation, Table


class Axis(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


def _overlap(a0: int, a1: int, b0: int, b1: int) -> bool:
    return a0 <= b1 and b0 <= a1


def adjacency_axis(a: LogicalLocation, b: LogicalLocation) -> Optional[Axis]:
    """Which way ``a`` and ``b`` touch, or None.

    Horizontal: row spans intersect and the cells sit in consecutive columns.
    Vertical: column spans intersect and the cells sit in consecutive rows.
    The two cases are mutually exclusive.
    """
    p = _overlap(a.start_row, a.end_row, b.start_row, b.end_row)
    q = a.start_col - b.end_col == 1 or b.start_col - a.end_col == 1
    if p and q:
        return Axis.HORIZONTAL
    r = _overlap(a.start_col, a.end_col, b.start_col, b.end_col)
    s = a.start_row - b.end_row == 1 or b.start_row - a.end_row == 1
    if r and s:
        return Axis.VERTICAL
    return None


def adjacency_relation(a: LogicalLocation, b: LogicalLocation) -> bool:
    return adjacency_axis(a, b) is not None


def adjacency_triplets(t: Table) -> list[tuple[int, int, Axis]]:
    """One (id_i, id_j, axis) per adjacent unordered pair, id_i < id_j, sorted."""
    cells = sorted(t.cells, key=lambda c: c.id)
    out: list[tuple[int, int, Axis]] = []
    for i, a in enumerate(cells):
        for b in cells[i + 1:]:
            axis = adjacency_axis(a.logical, b.logical)
            if axis is not None:
                out.append((a.id, b.id, axis))
    return out


def directed_adjacency(t: Table) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Ordered adjacent pairs over cell *positions* in ``t.cells``.

    A_r holds (i, j) with i immediately right of j in an overlapping row band;
    A_c holds (i, j) with i immediately below j in an overlapping column band.
    """
    a_r: list[tuple[int, int]] = []
    a_c: list[tuple[int, int]] = []
    locs = t.locations
    for i, li in enumerate(locs):
        for j, lj in enumerate(locs):
            if i == j:
                continue
            if li.start_col == lj.end_col + 1 and _overlap(li.start_row, li.end_row, lj.start_row, lj.end_row):
                a_r.append((i, j))
            elif li.start_row == lj.end_row + 1 and _overlap(li.start_col, li.end_col, lj.start_col, lj.end_col):
                a_c.append((i, j))
    return a_r, a_c
