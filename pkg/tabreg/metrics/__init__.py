from .matching import PRF, Counts, MatchResult, detection_f1, f1_score, iou_matrix, match_cells
from .logical import LogicalAccuracy, adjacency_counts, adjacency_f1, logical_accuracy
from .teds import markup_tree, teds, tree_edit_distance
from .bleu import bleu, markup_tokens
from .report import (
    ALL_METRICS,
    EvaluationInputError,
    MetricsReport,
    TableEvaluation,
    evaluate_dataset,
    evaluate_table,
    pair_by_id,
)

__all__ = [
    "ALL_METRICS",
    "Counts",
    "EvaluationInputError",
    "LogicalAccuracy",
    "MatchResult",
    "MetricsReport",
    "PRF",
    "TableEvaluation",
    "adjacency_counts",
    "adjacency_f1",
    "bleu",
    "detection_f1",
    "evaluate_dataset",
    "evaluate_table",
    "f1_score",
    "iou_matrix",
    "logical_accuracy",
    "markup_tokens",
    "match_cells",
    "markup_tree",
    "pair_by_id",
    "teds",
    "tree_edit_distance",
]
