from pydantic import BaseModel

from tabreg.metrics.matching import PRF, Counts, MatchResult
from tabreg.table import Axis, Table, adjacency_triplets


def _ratio(num: int, den: int, empty: float = 1.0) -> float:
    return num / den if den else empty


class LogicalAccuracy(BaseModel):
    """Per-gt-cell correctness counts for logical locations.

    Counts add up across tables so a dataset can be micro-averaged. Spanning
    accuracy reports 1.0 when no gt cell spans; ``spanning_count`` says so.
    """

    n_gt: int = 0
    correct: int = 0
    row_correct: int = 0
    col_correct: int = 0
    spanning_count: int = 0
    spanning_correct: int = 0

    def __add__(self, other: "LogicalAccuracy") -> "LogicalAccuracy":
        return LogicalAccuracy(**{k: getattr(self, k) + getattr(other, k) for k in type(self).model_fields})

    @property
    def acc_all(self) -> float:
        return _ratio(self.correct, self.n_gt, empty=0.0)

    @property
    def acc_spanning(self) -> float:
        return _ratio(self.spanning_correct, self.spanning_count)

    @property
    def acc_row(self) -> float:
        return _ratio(self.row_correct, self.n_gt, empty=0.0)

    @property
    def acc_col(self) -> float:
        return _ratio(self.col_correct, self.n_gt, empty=0.0)


def logical_accuracy(pred: Table, gt: Table, m: MatchResult) -> LogicalAccuracy:
    g2p = m.gt_to_pred()
    out = LogicalAccuracy(n_gt=len(gt.cells))
    for j, cell in enumerate(gt.cells):
        g = cell.logical
        spanning = g.is_spanning
        out.spanning_count += spanning
        i = g2p.get(j)
        if i is None:
            continue
        p = pred.cells[i].logical
        rows_ok = (p.start_row, p.end_row) == (g.start_row, g.end_row)
        cols_ok = (p.start_col, p.end_col) == (g.start_col, g.end_col)
        out.row_correct += rows_ok
        out.col_correct += cols_ok
        if rows_ok and cols_ok:
            out.correct += 1
            out.spanning_correct += spanning
    return out


def adjacency_counts(pred: Table, gt: Table, m: MatchResult) -> Counts:
    """Relation triplets compared in gt id space.

    Pred triplets touching an unmatched pred cell stay false positives.
    """
    p2g = m.pred_to_gt()
    pred_pos = {c.id: i for i, c in enumerate(pred.cells)}
    gt_ids = [c.id for c in gt.cells]

    gt_set: set[tuple[int, int, Axis]] = set(adjacency_triplets(gt))
    pred_triplets = adjacency_triplets(pred)
    mapped: set[tuple[int, int, Axis]] = set()
    for a, b, axis in pred_triplets:
        ga, gb = p2g.get(pred_pos[a]), p2g.get(pred_pos[b])
        if ga is None or gb is None:
            continue
        x, y = gt_ids[ga], gt_ids[gb]
        mapped.add((min(x, y), max(x, y), axis))
    return Counts(tp=len(mapped & gt_set), n_pred=len(pred_triplets), n_gt=len(gt_set))


def adjacency_f1(pred: Table, gt: Table, m: MatchResult) -> PRF:
    """(1, 1, 1) when neither table has any relation."""
    return adjacency_counts(pred, gt, m).prf(empty_is_perfect=True)
