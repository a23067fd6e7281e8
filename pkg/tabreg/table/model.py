"""Table data model.

Logical indices are 0-based grid indices on every surface (memory, JSON,
markup conversion). A logical location serializes as
``[start_row, end_row, start_col, end_col]`` and a quad as four ``[x, y]``
points ordered top-left, top-right, bottom-right, bottom-left.
"""
from __future__ import annotations

from typing import Any, Iterator, Optional, Sequence

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    FiniteFloat,
    NonNegativeInt,
    PositiveInt,
    model_serializer,
    model_validator,
)
from shapely.geometry import Polygon


class LogicalLocation(BaseModel):
    model_config = ConfigDict(frozen=True)

    start_row: NonNegativeInt
    end_row: NonNegativeInt
    start_col: NonNegativeInt
    end_col: NonNegativeInt

    @model_validator(mode="before")
    @classmethod
    def _from_sequence(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple)):
            if len(data) != 4:
                raise ValueError(f"logical location needs 4 indices, got {len(data)}")
            return dict(zip(("start_row", "end_row", "start_col", "end_col"), data))
        return data

    @model_validator(mode="after")
    def _ordered(self) -> "LogicalLocation":
        if self.start_row > self.end_row:
            raise ValueError(f"start_row {self.start_row} > end_row {self.end_row}")
        if self.start_col > self.end_col:
            raise ValueError(f"start_col {self.start_col} > end_col {self.end_col}")
        return self

    @model_serializer
    def _to_list(self) -> list[int]:
        return list(self.as_tuple())

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.start_row, self.end_row, self.start_col, self.end_col)

    @property
    def row_span(self) -> int:
        return 1 + self.end_row - self.start_row

    @property
    def col_span(self) -> int:
        return 1 + self.end_col - self.start_col

    @property
    def is_spanning(self) -> bool:
        return self.row_span > 1 or self.col_span > 1

    def slots(self) -> Iterator[tuple[int, int]]:
        for r in range(self.start_row, self.end_row + 1):
            for c in range(self.start_col, self.end_col + 1):
                yield r, c


def loc(sr: int, er: int, sc: int, ec: int) -> LogicalLocation:
    return LogicalLocation(start_row=sr, end_row=er, start_col=sc, end_col=ec)


Point = tuple[FiniteFloat, FiniteFloat]


class SpatialQuad(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: tuple[Point, Point, Point, Point] = Field(description="top-left, top-right, bottom-right, bottom-left")

    @model_validator(mode="before")
    @classmethod
    def _from_sequence(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple)):
            return {"points": data}
        return data

    @model_serializer
    def _to_list(self) -> list[list[float]]:
        return [[x, y] for x, y in self.points]

    @classmethod
    def from_box(cls, x0: float, y0: float, x1: float, y1: float) -> "SpatialQuad":
        return cls(points=((x0, y0), (x1, y0), (x1, y1), (x0, y1)))

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        return min(xs), min(ys), max(xs), max(ys)

    def center(self) -> tuple[float, float]:
        return (
            sum(p[0] for p in self.points) / 4.0,
            sum(p[1] for p in self.points) / 4.0,
        )

    def polygon(self) -> Polygon:
        return Polygon(self.points)

    @property
    def area(self) -> float:
        return float(self.polygon().area)

    def is_simple(self) -> bool:
        return bool(self.polygon().is_valid)


class Cell(BaseModel):
    id: int
    quad: SpatialQuad
    logical: LogicalLocation
    text: Optional[str] = None


class Table(BaseModel):
    cells: list[Cell] = Field(default_factory=list)
    n_rows: PositiveInt
    n_cols: PositiveInt
    image_size: tuple[PositiveInt, PositiveInt] = Field(description="(width, height) in pixels")

    def to_json_dict(self) -> dict[str, Any]:
        data = self.model_dump(exclude_none=True)
        data["image_size"] = list(self.image_size)
        return data

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "Table":
        return cls.model_validate(data)

    def cell_by_id(self, cell_id: int) -> Cell:
        for cell in self.cells:
            if cell.id == cell_id:
                return cell
        raise KeyError(cell_id)

    @property
    def locations(self) -> list[LogicalLocation]:
        return [c.logical for c in self.cells]

    @property
    def quads(self) -> list[SpatialQuad]:
        return [c.quad for c in self.cells]


def table_from_logical(
    locations: Sequence[LogicalLocation],
    texts: Optional[Sequence[Optional[str]]] = None,
    cell_size: tuple[float, float] = (100.0, 40.0),
) -> Table:
    """Build a table whose quads are the grid slots of each logical location.

    Cell ids follow the order of ``locations``.
    """
    w, h = cell_size
    n_rows = max((l.end_row for l in locations), default=0) + 1
    n_cols = max((l.end_col for l in locations), default=0) + 1
    cells = []
    for i, l in enumerate(locations):
        quad = SpatialQuad.from_box(l.start_col * w, l.start_row * h, (l.end_col + 1) * w, (l.end_row + 1) * h)
        text = texts[i] if texts is not None else None
        cells.append(Cell(id=i, quad=quad, logical=l, text=text))
    return Table(
        cells=cells,
        n_rows=n_rows,
        n_cols=n_cols,
        image_size=(max(1, int(round(n_cols * w))), max(1, int(round(n_rows * h)))),
    )
