from collections import Counter

from pydantic import BaseModel, Field

from tabreg.table.model import Table


class Violation(BaseModel):
    rule: str = Field(description="duplicate_id | range | overlap | quad_not_simple")
    cell_ids: list[int]
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.rule} {self.cell_ids}: {self.detail}"


def validate_table(t: Table) -> list[Violation]:
    """Empty iff every table invariant holds. Never raises."""
    violations: list[Violation] = []

    for cid, n in sorted(Counter(c.id for c in t.cells).items()):
        if n > 1:
            violations.append(Violation(rule="duplicate_id", cell_ids=[cid], detail=f"id used by {n} cells"))

    # keyed by position so cells sharing an id still clash
    owner: dict[tuple[int, int], int] = {}
    clashes: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for k, cell in enumerate(t.cells):
        l = cell.logical
        if l.end_row >= t.n_rows or l.end_col >= t.n_cols:
            violations.append(Violation(
                rule="range",
                cell_ids=[cell.id],
                detail=f"{list(l.as_tuple())} outside {t.n_rows}x{t.n_cols} grid",
            ))
        for slot in l.slots():
            if slot in owner:
                clashes.setdefault((owner[slot], k), []).append(slot)
            else:
                owner[slot] = k

    for (a, b), slots in sorted(clashes.items()):
        ids = sorted((t.cells[a].id, t.cells[b].id))
        violations.append(Violation(rule="overlap", cell_ids=ids, detail=f"{len(slots)} shared slot(s), first {slots[0]}"))

    for cell in t.cells:
        try:
            simple = cell.quad.is_simple()
        except Exception:
            simple = False
        if not simple:
            violations.append(Violation(rule="quad_not_simple", cell_ids=[cell.id], detail="self-intersecting or degenerate quad"))

    return violations
