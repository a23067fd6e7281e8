from .model import Cell, LogicalLocation, SpatialQuad, Table, loc, table_from_logical
from .adjacency import Axis, adjacency_axis, adjacency_relation, adjacency_triplets, directed_adjacency
from .markup import (
    MarkupCell,
    MarkupParseError,
    markup_cells,
    markup_to_table,
    parse_markup,
    parse_markup_rows,
    rows_partition,
    to_markup,
)
from .validate import Violation, validate_table

__all__ = [
    "Axis",
    "Cell",
    "LogicalLocation",
    "MarkupCell",
    "MarkupParseError",
    "SpatialQuad",
    "Table",
    "Violation",
    "adjacency_axis",
    "adjacency_relation",
    "adjacency_triplets",
    "directed_adjacency",
    "loc",
    "markup_cells",
    "markup_to_table",
    "parse_markup",
    "parse_markup_rows",
    "rows_partition",
    "table_from_logical",
    "to_markup",
    "validate_table",
]
