import itertools
import math
from functools import lru_cache

import numpy as np
import pytest

from conftest import random_tables
from tabreg.metrics import (
    Counts,
    EvaluationInputError,
    adjacency_f1,
    bleu,
    detection_f1,
    evaluate_dataset,
    evaluate_table,
    iou_matrix,
    logical_accuracy,
    markup_tokens,
    match_cells,
    pair_by_id,
    teds,
)
from tabreg.metrics.teds import markup_tree, node_count
from tabreg.stores.dataset_store import record_from_table
from tabreg.synth.cases import column_shift_case
from tabreg.table import MarkupParseError, SpatialQuad, Table, loc, parse_markup, rows_partition, table_from_logical, to_markup


def grid_2x2() -> Table:
    return table_from_logical([loc(0, 0, 0, 0), loc(0, 0, 1, 1), loc(1, 1, 0, 0), loc(1, 1, 1, 1)])


def with_locations(t: Table, locations) -> Table:
    cells = [c.model_copy(update={"logical": l}) for c, l in zip(t.cells, locations)]
    return t.model_copy(update={"cells": cells})


def oracle_matching(iou: np.ndarray, thr: float) -> tuple[int, float]:
    """Largest matching over qualifying pairs, then largest total IoU, by enumeration."""
    n_pred, n_gt = iou.shape
    best = (0, 0.0)
    for choice in itertools.product(range(-1, n_gt), repeat=n_pred):
        used = [j for j in choice if j >= 0]
        if len(used) != len(set(used)):
            continue
        if any(j >= 0 and iou[i, j] <= thr for i, j in enumerate(choice)):
            continue
        total = sum(iou[i, j] for i, j in enumerate(choice) if j >= 0)
        best = max(best, (len(used), total))
    return best


def oracle_tree(t: Table):
    by_id = {c.id: c for c in t.cells}
    rows = []
    for row in rows_partition(t):
        tds = tuple((("td", by_id[i].logical.row_span, by_id[i].logical.col_span), ()) for i in row)
        rows.append((("tr",), tds))
    return (("table",), tuple(rows))


def tree_size(tree) -> int:
    return 1 + sum(tree_size(k) for k in tree[1])


@lru_cache(maxsize=None)
def forest_distance(f1, f2) -> int:
    if not f1 and not f2:
        return 0
    if not f1:
        return sum(tree_size(t) for t in f2)
    if not f2:
        return sum(tree_size(t) for t in f1)
    v, w = f1[-1], f2[-1]
    return min(
        forest_distance(f1[:-1] + v[1], f2) + 1,
        forest_distance(f1, f2[:-1] + w[1]) + 1,
        forest_distance(v[1], w[1]) + forest_distance(f1[:-1], f2[:-1]) + (v[0] != w[0]),
    )


class TestMatching:
    def test_iou(self):
        a = [SpatialQuad.from_box(0, 0, 2, 2)]
        b = [SpatialQuad.from_box(1, 0, 3, 2), SpatialQuad.from_box(5, 5, 6, 6)]
        assert iou_matrix(a, b) == pytest.approx(np.array([[1 / 3, 0.0]]))
        assert iou_matrix([], b).shape == (0, 2)

    def test_threshold_is_strict(self):
        a = [SpatialQuad.from_box(0, 0, 2, 2)]
        b = [SpatialQuad.from_box(1, 0, 3, 2)]
        assert match_cells(a, b, iou_threshold=1 / 3).pairs == []
        assert len(match_cells(a, b, iou_threshold=0.3).pairs) == 1

    @pytest.mark.parametrize("thr", [0.0, -0.1, 1.5])
    def test_threshold_range(self, thr):
        with pytest.raises(ValueError):
            match_cells([], [], thr)

    def test_identity(self):
        t = random_tables(1, seed=2)[0]
        m = match_cells(t.quads, t.quads)
        assert [(p, g) for p, g, _ in m.pairs] == [(i, i) for i in range(len(t.cells))]
        assert detection_f1(m) == (1.0, 1.0, 1.0)

    def test_agrees_with_enumeration(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 5))
            gt = [SpatialQuad.from_box(100 * k, 0, 100 * k + 80, 40) for k in range(n)]
            pred = []
            for k in rng.permutation(n)[: int(rng.integers(0, n + 1))]:
                dx, dy = rng.normal(0, 8, 2)
                pred.append(SpatialQuad.from_box(100 * k + dx, dy, 100 * k + 80 + dx, 40 + dy))
            if rng.random() < 0.5:
                pred.append(SpatialQuad.from_box(1000, 1000, 1050, 1030))
            iou = iou_matrix(pred, gt)
            m = match_cells(pred, gt)
            size, total = oracle_matching(iou, 0.5)
            assert len(m.pairs) == size
            assert sum(v for _, _, v in m.pairs) == pytest.approx(total)

    def test_detection_counts(self):
        gt = [SpatialQuad.from_box(0, 0, 10, 10), SpatialQuad.from_box(20, 0, 30, 10)]
        pred = [SpatialQuad.from_box(0, 0, 10, 10), SpatialQuad.from_box(50, 50, 60, 60), SpatialQuad.from_box(70, 0, 80, 10)]
        p, r, f1 = detection_f1(match_cells(pred, gt))
        assert (p, r) == pytest.approx((1 / 3, 1 / 2))
        assert f1 == pytest.approx(0.4)

    def test_counts_add(self):
        total = Counts(tp=1, n_pred=2, n_gt=3) + Counts(tp=2, n_pred=2, n_gt=2)
        assert total == Counts(tp=3, n_pred=4, n_gt=5)
        assert Counts().prf() == (0.0, 0.0, 0.0)
        assert Counts().prf(empty_is_perfect=True) == (1.0, 1.0, 1.0)


class TestLogical:
    def test_one_wrong_row(self):
        gt = grid_2x2()
        pred = with_locations(gt, [loc(0, 0, 0, 0), loc(0, 0, 1, 1), loc(2, 2, 0, 0), loc(1, 1, 1, 1)])
        acc = logical_accuracy(pred, gt, match_cells(pred.quads, gt.quads))
        assert acc.acc_all == pytest.approx(0.75)
        assert acc.acc_row == pytest.approx(0.75)
        assert acc.acc_col == 1.0
        assert acc.spanning_count == 0
        assert acc.acc_spanning == 1.0

    def test_unmatched_gt_counts_wrong(self):
        gt = grid_2x2()
        pred = gt.model_copy(update={"cells": gt.cells[:3]})
        acc = logical_accuracy(pred, gt, match_cells(pred.quads, gt.quads))
        assert (acc.correct, acc.n_gt) == (3, 4)

    def test_spanning(self):
        gt = table_from_logical([loc(0, 1, 0, 0), loc(0, 0, 1, 1), loc(1, 1, 1, 1)])
        pred = with_locations(gt, [loc(0, 0, 0, 0), loc(0, 0, 1, 1), loc(1, 1, 1, 1)])
        acc = logical_accuracy(pred, gt, match_cells(pred.quads, gt.quads))
        assert acc.spanning_count == 1
        assert acc.acc_spanning == 0.0
        assert acc.acc_col == 1.0

    def test_accumulates(self):
        gt = grid_2x2()
        m = match_cells(gt.quads, gt.quads)
        acc = logical_accuracy(gt, gt, m) + logical_accuracy(gt, gt, m)
        assert (acc.n_gt, acc.correct) == (8, 8)


class TestAdjacencyF1:
    def test_identity(self):
        for t in random_tables(20, seed=8):
            assert adjacency_f1(t, t, match_cells(t.quads, t.quads)) == (1.0, 1.0, 1.0)

    def test_single_cells(self):
        t = table_from_logical([loc(0, 0, 0, 0)])
        assert adjacency_f1(t, t, match_cells(t.quads, t.quads)) == (1.0, 1.0, 1.0)

    def test_missing_cell_loses_relations(self):
        gt = grid_2x2()
        pred = gt.model_copy(update={"cells": gt.cells[:3]})
        p, r, _ = adjacency_f1(pred, gt, match_cells(pred.quads, gt.quads))
        assert p == 1.0
        assert r == pytest.approx(2 / 4)

    def test_column_shift_separates_metrics(self):
        gt, pred = column_shift_case()
        m = match_cells(pred.quads, gt.quads)
        acc = logical_accuracy(pred, gt, m).acc_all
        _, _, f1 = adjacency_f1(pred, gt, m)
        assert acc == pytest.approx(3 / 7)
        assert f1 == pytest.approx(82 / 86)
        assert f1 - acc >= 0.2


class TestTeds:
    def test_identity(self):
        for t in random_tables(10, seed=4):
            assert teds(to_markup(t), to_markup(t)) == 1.0

    def test_one_span_changed(self):
        gt = "<tr><td></td><td></td></tr><tr><td></td><td></td></tr>"
        pred = '<tr><td></td><td></td></tr><tr><td></td><td colspan="2"></td></tr>'
        assert node_count(markup_tree(gt)) == 7
        assert teds(pred, gt) == pytest.approx(1 - 1 / 7)

    def test_text_mode(self):
        gt = "<tr><td>abcd</td></tr>"
        assert teds("<tr><td>abcd</td></tr>", gt, use_text=True) == 1.0
        assert teds("<tr><td>abce</td></tr>", gt, use_text=True) == pytest.approx(1 - 0.25 / 3)
        assert teds("<tr><td>abce</td></tr>", gt) == 1.0

    def test_agrees_with_exhaustive_distance(self):
        tables = [
            t for t in random_tables(60, seed=13, span_probs=(0.0, 0.3), max_size=3)
            if tree_size(oracle_tree(t)) <= 10
        ]
        assert len(tables) >= 10
        for a, b in zip(tables, tables[1:]):
            ta, tb = oracle_tree(a), oracle_tree(b)
            expected = 1 - forest_distance((ta,), (tb,)) / max(tree_size(ta), tree_size(tb))
            assert teds(to_markup(a), to_markup(b)) == pytest.approx(expected)

    def test_row_against_column(self):
        row = table_from_logical([loc(0, 0, c, c) for c in range(3)])
        col = table_from_logical([loc(r, r, 0, 0) for r in range(3)])
        ta, tb = oracle_tree(row), oracle_tree(col)
        expected = 1 - forest_distance((ta,), (tb,)) / 7
        assert teds(to_markup(row), to_markup(col)) == pytest.approx(expected)

    def test_overlapping_spans_still_score(self):
        pred = table_from_logical([loc(0, 0, 0, 0), loc(0, 1, 1, 1), loc(1, 1, 0, 1)])
        markup = to_markup(pred)
        with pytest.raises(MarkupParseError):
            parse_markup(markup)
        assert node_count(markup_tree(markup)) == 6
        assert teds(markup, to_markup(grid_2x2())) == pytest.approx(1 - 3 / 7)

    def test_names_the_bad_side(self):
        with pytest.raises(MarkupParseError, match="pred markup"):
            teds("<tr><td>", "<tr><td></td></tr>")
        with pytest.raises(MarkupParseError, match="gt markup"):
            teds("<tr><td></td></tr>", "<tr><td>")


class TestBleu:
    def test_tokens(self):
        assert markup_tokens('<tr><td rowspan="1" colspan="2">a b</td></tr>') == [
            "<tr>", '<td rowspan="1" colspan="2">', "a b", "</td>", "</tr>",
        ]

    def test_identity(self):
        tokens = [f"t{i}" for i in range(20)]
        assert bleu(tokens, tokens) == pytest.approx(1.0)

    def test_one_substitution(self):
        reference = [f"t{i}" for i in range(20)]
        candidate = list(reference)
        candidate[10] = "x"
        assert bleu(candidate, reference) == pytest.approx((195 / 360) ** 0.25)

    def test_brevity_penalty(self):
        reference = [f"t{i}" for i in range(20)]
        assert bleu(reference[:10], reference) == pytest.approx(math.exp(-1))

    def test_empty(self):
        assert bleu([], ["a"]) == 0.0
        assert bleu(["a", "b", "c"], ["x", "y", "z"]) == 0.0


class TestReport:
    def test_perfect(self):
        tables = random_tables(12, seed=6)
        report = evaluate_dataset([(t, t) for t in tables], workers=3)
        assert report.n_tables == 12
        for name in ("detection_f1", "adjacency_f1", "logical_accuracy", "teds", "bleu"):
            assert getattr(report, name) == pytest.approx(1.0)
        assert report.summary().splitlines()[0].split() == ["tables", "12"]

    def test_metric_subset(self):
        t = grid_2x2()
        report = evaluate_dataset([(t, t)], metrics=["teds"])
        assert report.teds == 1.0
        assert report.detection_f1 is None
        assert "detection_f1" not in report.summary()

    def test_unknown_metric(self):
        with pytest.raises(ValueError):
            evaluate_table(grid_2x2(), grid_2x2(), metrics=["recall@5"])

    def test_micro_average(self):
        gt = grid_2x2()
        partial = gt.model_copy(update={"cells": gt.cells[:2]})
        report = evaluate_dataset([(gt, gt), (partial, gt)], metrics=["detection"])
        assert report.detection_p == 1.0
        assert report.detection_r == pytest.approx(6 / 8)

    def test_overlapping_prediction(self):
        gt = grid_2x2()
        pred = table_from_logical([loc(0, 0, 0, 0), loc(0, 1, 1, 1), loc(1, 1, 0, 1)])
        report = evaluate_dataset([(pred, gt), (gt, gt)])
        assert report.teds == pytest.approx((4 / 7 + 1) / 2)
        assert 0.0 <= report.bleu < 1.0

    def test_text_aware_teds(self):
        gt = table_from_logical([loc(0, 0, 0, 0)], texts=["abcd"])
        pred = table_from_logical([loc(0, 0, 0, 0)], texts=["abce"])
        assert evaluate_table(pred, gt, metrics=["teds"]).teds == 1.0
        scored = evaluate_dataset([(pred, gt)], metrics=["teds"], teds_text=True)
        assert scored.teds == pytest.approx(1 - 0.25 / 3)
        assert scored.teds_text

    def test_pair_by_id(self):
        a, b = (record_from_table(t, f"t{i}") for i, t in enumerate(random_tables(2, seed=1)))
        pairs = pair_by_id([b, a], [a, b])
        assert [(p.table_id, g.table_id) for p, g in pairs] == [("t0", "t0"), ("t1", "t1")]
        with pytest.raises(EvaluationInputError) as exc:
            pair_by_id([a], [a, b])
        assert exc.value.ids == ["t1"]
