"""Tree-edit-distance similarity over the table markup."""
import Levenshtein
import zss

from tabreg.table.markup import MarkupParseError, markup_cells


def markup_tree(markup: str, with_text: bool = False) -> zss.Node:
    """root ``table`` -> one ``tr`` per row -> one ``td`` per cell.

    td labels are ``("td", rowspan, colspan, text)``; text is "" unless requested.
    Built from the tags alone, so overlapping spans in a prediction still score.
    """
    root = zss.Node(("table",))
    for row in markup_cells(markup):
        tr = zss.Node(("tr",))
        for cell in row:
            text = cell.text if with_text else ""
            tr.addkid(zss.Node(("td", cell.rowspan, cell.colspan, text)))
        root.addkid(tr)
    return root


def node_count(node: zss.Node) -> int:
    return 1 + sum(node_count(k) for k in zss.Node.get_children(node))


def _insert_cost(_node: zss.Node) -> float:
    return 1.0


def _rename_cost(use_text: bool):
    def cost(a: zss.Node, b: zss.Node) -> float:
        la, lb = zss.Node.get_label(a), zss.Node.get_label(b)
        if la[0] != lb[0]:
            return 1.0
        if la[0] != "td":
            return 0.0
        if la[1:3] != lb[1:3]:
            return 1.0
        if not use_text:
            return 0.0
        ta, tb = la[3], lb[3]
        if not ta and not tb:
            return 0.0
        return Levenshtein.distance(ta, tb) / max(len(ta), len(tb))

    return cost


def tree_edit_distance(a: zss.Node, b: zss.Node, use_text: bool = False) -> float:
    return float(zss.distance(
        a,
        b,
        get_children=zss.Node.get_children,
        insert_cost=_insert_cost,
        remove_cost=_insert_cost,
        update_cost=_rename_cost(use_text),
    ))


def _tree(markup: str, which: str, use_text: bool) -> zss.Node:
    try:
        return markup_tree(markup, with_text=use_text)
    except MarkupParseError as e:
        raise MarkupParseError(f"{which} markup: {e.message}", e.offset) from e


def teds(pred_markup: str, gt_markup: str, use_text: bool = False) -> float:
    pred = _tree(pred_markup, "pred", use_text)
    gt = _tree(gt_markup, "gt", use_text)
    n = max(node_count(pred), node_count(gt))
    dist = tree_edit_distance(pred, gt, use_text)
    return min(1.0, max(0.0, 1.0 - dist / n))
