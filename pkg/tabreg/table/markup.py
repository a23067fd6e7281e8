"""Logical locations <-> the ``<tr>/<td rowspan colspan>`` markup subset."""
import html
import re
from typing import NamedTuple, Optional

from lxml import etree

from tabreg.table.model import LogicalLocation, Table, table_from_logical

_WRAP_OPEN = "<table>"
_WRAP_CLOSE = "</table>"
_TD_RE = re.compile(r"<td\b")
_TR_RE = re.compile(r"<tr\b")
_SPAN_ATTRS = ("rowspan", "colspan")


class MarkupParseError(ValueError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at offset {offset})")
        self.message = message
        self.offset = offset


class ParsedCell(NamedTuple):
    location: LogicalLocation
    text: str


def rows_partition(t: Table) -> list[list[int]]:
    """C_0..C_{K-1}: ids of cells starting in row k, ordered by start column."""
    rows: list[list[tuple[int, int]]] = [[] for _ in range(t.n_rows)]
    for cell in t.cells:
        rows[cell.logical.start_row].append((cell.logical.start_col, cell.id))
    return [[cid for _, cid in sorted(row)] for row in rows]


def to_markup(t: Table, with_text: bool = False) -> str:
    if not t.cells:
        return ""
    by_id = {c.id: c for c in t.cells}
    parts: list[str] = []
    for row in rows_partition(t):
        parts.append("<tr>")
        for cid in row:
            cell = by_id[cid]
            l = cell.logical
            body = html.escape(cell.text or "", quote=False) if with_text else ""
            parts.append(f'<td rowspan="{l.row_span}" colspan="{l.col_span}">{body}</td>')
        parts.append("</tr>")
    return "".join(parts)


def _syntax_offset(s: str, err: etree.XMLSyntaxError) -> int:
    wrapped = _WRAP_OPEN + s + _WRAP_CLOSE
    line, col = err.position if err.position else (1, 1)
    lines = wrapped.split("\n")
    idx = sum(len(l) + 1 for l in lines[: max(0, line - 1)]) + max(0, col - 1)
    return min(max(0, idx - len(_WRAP_OPEN)), len(s))


def _span(td: etree._Element, attr: str, offset: int) -> int:
    raw = td.get(attr)
    if raw is None:
        return 1
    try:
        value = int(raw.strip())
    except ValueError:
        raise MarkupParseError(f"{attr} is not an integer: {raw!r}", offset)
    if value < 1:
        raise MarkupParseError(f"{attr} < 1", offset)
    return value


class MarkupCell(NamedTuple):
    rowspan: int
    colspan: int
    text: str
    offset: int


def markup_cells(s: str) -> list[list[MarkupCell]]:
    """Spans and text of every td, grouped by ``<tr>``, with no grid layout.

    Tag, attribute and span-value errors raise; overlapping footprints do not.
    """
    if not s.strip():
        return []
    parser = etree.XMLParser(resolve_entities=False, no_network=True, huge_tree=False)
    try:
        root = etree.fromstring(_WRAP_OPEN + s + _WRAP_CLOSE, parser)
    except etree.XMLSyntaxError as e:
        raise MarkupParseError(f"malformed tag: {e.msg}", _syntax_offset(s, e)) from e

    td_offsets = [m.start() for m in _TD_RE.finditer(s)]
    tr_offsets = [m.start() for m in _TR_RE.finditer(s)]
    rows: list[list[MarkupCell]] = []
    td_index = 0

    for r, tr in enumerate(root):
        tr_offset = tr_offsets[r] if r < len(tr_offsets) else 0
        if not isinstance(tr.tag, str) or tr.tag != "tr":
            raise MarkupParseError(f"unexpected <{tr.tag}> where <tr> expected", tr_offset)
        row: list[MarkupCell] = []
        for td in tr:
            offset = td_offsets[td_index] if td_index < len(td_offsets) else tr_offset
            if not isinstance(td.tag, str) or td.tag != "td":
                raise MarkupParseError(f"unexpected <{td.tag}> where <td> expected", offset)
            unknown = set(td.attrib) - set(_SPAN_ATTRS)
            if unknown:
                raise MarkupParseError(f"unsupported attribute(s) {sorted(unknown)}", offset)
            if len(td):
                raise MarkupParseError(f"unexpected <{td[0].tag}> inside <td>", offset)
            row.append(MarkupCell(_span(td, "rowspan", offset), _span(td, "colspan", offset), td.text or "", offset))
            td_index += 1
        rows.append(row)
    return rows


def parse_markup_rows(s: str) -> list[list[ParsedCell]]:
    """Grid-filling layout of the markup, grouped by ``<tr>``.

    Each td lands on the leftmost column of its row that no earlier span
    occupies; its rowspan x colspan footprint is then marked.
    """
    occupied: set[tuple[int, int]] = set()
    rows: list[list[ParsedCell]] = []
    for r, cells in enumerate(markup_cells(s)):
        row: list[ParsedCell] = []
        c = 0
        for cell in cells:
            # skip slots held by rowspans from earlier rows
            while (r, c) in occupied:
                c += 1
            footprint = [(rr, cc) for rr in range(r, r + cell.rowspan) for cc in range(c, c + cell.colspan)]
            clash = [slot for slot in footprint if slot in occupied]
            if clash:
                raise MarkupParseError(f"overlapping footprint at grid slot {clash[0]}", cell.offset)
            occupied.update(footprint)

            location = LogicalLocation(start_row=r, end_row=r + cell.rowspan - 1, start_col=c, end_col=c + cell.colspan - 1)
            row.append(ParsedCell(location, cell.text))
            c += cell.colspan
        rows.append(row)
    return rows


def parse_markup(s: str) -> list[LogicalLocation]:
    """Logical locations in document order."""
    return [cell.location for row in parse_markup_rows(s) for cell in row]


def markup_to_table(s: str, with_text: bool = False, cell_size: Optional[tuple[float, float]] = None) -> Table:
    cells = [cell for row in parse_markup_rows(s) for cell in row]
    texts = [c.text for c in cells] if with_text else None
    return table_from_logical([c.location for c in cells], texts, cell_size or (100.0, 40.0))
