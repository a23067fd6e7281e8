from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Optional, Sequence

from pydantic import BaseModel, Field

from tabreg.logger import get_logger
from tabreg.metrics.bleu import bleu, markup_tokens
from tabreg.metrics.logical import LogicalAccuracy, adjacency_counts, logical_accuracy
from tabreg.metrics.matching import Counts, match_cells
from tabreg.metrics.teds import teds
from tabreg.table import Table, to_markup

log = get_logger(__name__)

ALL_METRICS = ("detection", "adjacency", "logical", "teds", "bleu")


class EvaluationInputError(ValueError):
    def __init__(self, message: str, ids: Iterable[str] = ()) -> None:
        self.ids = sorted(ids)
        super().__init__(f"{message}: {', '.join(self.ids)}" if self.ids else message)


class TableEvaluation(BaseModel):
    """Raw per-table counts and scores; summed / averaged by ``evaluate_dataset``."""

    detection: Counts = Field(default_factory=Counts)
    adjacency: Counts = Field(default_factory=Counts)
    logical: LogicalAccuracy = Field(default_factory=LogicalAccuracy)
    teds: Optional[float] = None
    bleu: Optional[float] = None


class MetricsReport(BaseModel):
    detection_p: Optional[float] = None
    detection_r: Optional[float] = None
    detection_f1: Optional[float] = None
    adjacency_p: Optional[float] = None
    adjacency_r: Optional[float] = None
    adjacency_f1: Optional[float] = None
    logical_accuracy: Optional[float] = None
    logical_accuracy_spanning: Optional[float] = None
    logical_accuracy_row: Optional[float] = None
    logical_accuracy_col: Optional[float] = None
    spanning_count: Optional[int] = None
    teds: Optional[float] = None
    bleu: Optional[float] = None
    n_tables: int = 0
    iou_threshold: float = 0.5
    teds_text: bool = False

    def summary(self) -> str:
        """Fixed-order text block; metrics that were not computed are skipped."""
        lines = [f"tables                     {self.n_tables}"]
        for name in (
            "detection_p", "detection_r", "detection_f1",
            "adjacency_p", "adjacency_r", "adjacency_f1",
            "logical_accuracy", "logical_accuracy_spanning",
            "logical_accuracy_row", "logical_accuracy_col",
            "spanning_count", "teds", "bleu",
        ):
            value = getattr(self, name)
            if value is None:
                continue
            shown = str(value) if isinstance(value, int) else f"{value:.4f}"
            lines.append(f"{name:<27}{shown}")
        return "\n".join(lines)


def _check_metrics(metrics: Iterable[str]) -> frozenset[str]:
    chosen = frozenset(metrics)
    unknown = chosen - set(ALL_METRICS)
    if unknown:
        raise ValueError(f"unknown metric(s) {sorted(unknown)}; choose from {list(ALL_METRICS)}")
    return chosen


def evaluate_table(
    pred: Table,
    gt: Table,
    iou_threshold: float = 0.5,
    metrics: Iterable[str] = ALL_METRICS,
    teds_text: bool = False,
) -> TableEvaluation:
    """Per-table counts; ``teds_text`` scores cell text in TEDS, BLEU stays on structure tokens."""
    chosen = _check_metrics(metrics)
    out = TableEvaluation()
    if chosen & {"detection", "adjacency", "logical"}:
        m = match_cells(pred.quads, gt.quads, iou_threshold)
        out.detection = m.counts
        if "adjacency" in chosen:
            out.adjacency = adjacency_counts(pred, gt, m)
        if "logical" in chosen:
            out.logical = logical_accuracy(pred, gt, m)
    if "teds" in chosen:
        out.teds = teds(to_markup(pred, with_text=teds_text), to_markup(gt, with_text=teds_text), use_text=teds_text)
    if "bleu" in chosen:
        out.bleu = bleu(markup_tokens(to_markup(pred)), markup_tokens(to_markup(gt)))
    return out


def pair_by_id(preds: Sequence, gts: Sequence) -> list[tuple[Table, Table]]:
    """Align records carrying ``table_id``; ids must be the same set on both sides."""
    pred_map = {r.table_id: r for r in preds}
    gt_map = {r.table_id: r for r in gts}
    if len(pred_map) != len(preds) or len(gt_map) != len(gts):
        raise EvaluationInputError("duplicate table ids in evaluation input")
    missing = set(gt_map) - set(pred_map)
    extra = set(pred_map) - set(gt_map)
    if missing or extra:
        raise EvaluationInputError("prediction and ground-truth table ids differ", missing | extra)
    return [(pred_map[r.table_id], r) for r in gts]


def evaluate_dataset(
    pairs: Sequence[tuple[Table, Table]],
    iou_threshold: float = 0.5,
    metrics: Iterable[str] = ALL_METRICS,
    workers: int = 1,
    teds_text: bool = False,
) -> MetricsReport:
    """Micro-average detection / adjacency / logical counts, macro-average TEDS and BLEU."""
    chosen = _check_metrics(metrics)

    def one(pair: tuple[Table, Table]) -> TableEvaluation:
        return evaluate_table(pair[0], pair[1], iou_threshold, chosen, teds_text)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(p) for p in pairs]

    report = MetricsReport(n_tables=len(results), iou_threshold=iou_threshold, teds_text=teds_text)
    if not results:
        log.warning("empty evaluation input")
        return report

    if "detection" in chosen:
        det = sum((r.detection for r in results), Counts()).prf()
        report.detection_p, report.detection_r, report.detection_f1 = det
    if "adjacency" in chosen:
        adj = sum((r.adjacency for r in results), Counts()).prf(empty_is_perfect=True)
        report.adjacency_p, report.adjacency_r, report.adjacency_f1 = adj
    if "logical" in chosen:
        acc = sum((r.logical for r in results), LogicalAccuracy())
        report.logical_accuracy = acc.acc_all
        report.logical_accuracy_spanning = acc.acc_spanning
        report.logical_accuracy_row = acc.acc_row
        report.logical_accuracy_col = acc.acc_col
        report.spanning_count = acc.spanning_count
    if "teds" in chosen:
        report.teds = sum(r.teds for r in results) / len(results)
    if "bleu" in chosen:
        report.bleu = sum(r.bleu for r in results) / len(results)

    log.info("evaluation finished", extra={"tables": len(results), "metrics": sorted(chosen)})
    return report
