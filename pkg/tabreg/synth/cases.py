from tabreg.table.model import LogicalLocation, Table, loc, table_from_logical


def column_shift_case(n_rows: int = 4, n_cols: int = 7, shift_from: int = 3) -> tuple[Table, Table]:
    """A plain grid and a prediction that pushes every column from ``shift_from`` one step right.

    Geometry is shared, so every cell matches. Only the first ``shift_from``
    columns keep correct logical locations, while adjacency loses just the
    relations across the shift.
    """
    if not 0 < shift_from < n_cols:
        raise ValueError(f"shift_from must be in 1..{n_cols - 1}, got {shift_from}")
    gt = table_from_logical([loc(r, r, c, c) for r in range(n_rows) for c in range(n_cols)])

    def shifted(l: LogicalLocation) -> LogicalLocation:
        d = 1 if l.start_col >= shift_from else 0
        return loc(l.start_row, l.end_row, l.start_col + d, l.end_col + d)

    cells = [c.model_copy(update={"logical": shifted(c.logical)}) for c in gt.cells]
    pred = gt.model_copy(update={"cells": cells, "n_cols": n_cols + 1})
    return gt, pred
