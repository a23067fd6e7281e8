import numpy as np
import pytest
from pydantic import ValidationError

from tabreg.synth.config import GenConfig, parse_range
from tabreg.synth.generator import (
    generate_record,
    generate_records,
    generate_table,
    generate_word_boxes,
    perturb_quads,
    table_id,
)
from tabreg.synth.grid import WordBox, cluster_to_grid, cluster_word_grid, ldp_labels
from tabreg.table import validate_table


class TestConfig:
    def test_parse_range(self):
        assert parse_range("2..8") == (2, 8)
        assert parse_range("5") == (5, 5)
        with pytest.raises(ValueError):
            parse_range("a..b")

    def test_accepts_range_strings(self):
        cfg = GenConfig(rows_range="3..4", seed=1)
        assert cfg.rows_range == (3, 4)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"span_prob": 1.0},
            {"span_prob": -0.1},
            {"rows_range": (5, 2)},
            {"cols_range": (0, 3)},
            {"seed": -1},
            {"seed": 2**64},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValidationError):
            GenConfig(**{"seed": 1, **kwargs})


class TestGenerator:
    def test_deterministic(self, gen_cfg):
        assert generate_table(gen_cfg, 3) == generate_table(gen_cfg, 3)
        assert generate_table(gen_cfg, 3) != generate_table(gen_cfg, 4)

    def test_parallel_matches_serial(self, gen_cfg):
        serial = generate_records(gen_cfg, 12)
        parallel = generate_records(gen_cfg, 12, workers=4)
        assert serial == parallel
        assert [r.table_id for r in serial] == [table_id(gen_cfg, i) for i in range(12)]

    def test_start_offset(self, gen_cfg):
        assert generate_records(gen_cfg, 3, start=5) == generate_records(gen_cfg, 8)[5:]

    def test_no_spans_fills_grid(self):
        cfg = GenConfig(span_prob=0.0, seed=3)
        for i in range(30):
            t = generate_table(cfg, i)
            assert len(t.cells) == t.n_rows * t.n_cols
            assert not any(c.logical.is_spanning for c in t.cells)

    def test_valid_and_inside_image(self):
        cfg = GenConfig(span_prob=0.4, max_span=4, rows_range=(1, 12), cols_range=(1, 12), seed=9)
        for i in range(100):
            t = generate_table(cfg, i)
            assert validate_table(t) == []
            assert sum(c.logical.row_span * c.logical.col_span for c in t.cells) == t.n_rows * t.n_cols
            w, h = t.image_size
            for c in t.cells:
                x0, y0, x1, y1 = c.quad.bbox()
                assert 0 <= x0 < x1 <= w
                assert 0 <= y0 < y1 <= h

    def test_every_row_and_column_has_a_start(self):
        cfg = GenConfig(span_prob=0.4, max_span=4, rows_range=(1, 8), cols_range=(1, 8), seed=7)
        for i in range(200):
            t = generate_table(cfg, i)
            assert {c.logical.start_row for c in t.cells} == set(range(t.n_rows))
            assert {c.logical.start_col for c in t.cells} == set(range(t.n_cols))

    def test_spans_appear(self):
        cfg = GenConfig(span_prob=0.5, seed=4)
        assert any(c.logical.is_spanning for i in range(20) for c in generate_table(cfg, i).cells)

    def test_empty_text(self):
        cfg = GenConfig(empty_text_prob=1.0, seed=2)
        t = generate_table(cfg, 0)
        assert all(c.text == "" for c in t.cells)
        assert generate_word_boxes(t, cfg, 0) == []


class TestPerturb:
    def test_zero_sigma_is_copy(self, gen_cfg):
        t = generate_table(gen_cfg, 0)
        assert perturb_quads(t, 0.0, 1) == t

    def test_negative_sigma(self, gen_cfg):
        with pytest.raises(ValueError):
            perturb_quads(generate_table(gen_cfg, 0), -1.0, 1)

    def test_noise_statistics(self):
        cfg = GenConfig(rows_range=(6, 8), cols_range=(4, 6), seed=5)
        deltas = []
        for i in range(20):
            t = generate_table(cfg, i)
            noisy = perturb_quads(t, 3.0, i)
            deltas.append(np.array([c.quad.points for c in noisy.cells]) - np.array([c.quad.points for c in t.cells]))
        d = np.concatenate([x.ravel() for x in deltas])
        assert abs(d.mean()) < 0.15
        assert abs(d.std() - 3.0) < 0.15

    def test_clamped_to_image(self, gen_cfg):
        t = perturb_quads(generate_table(gen_cfg, 0), 500.0, 2)
        w, h = t.image_size
        pts = np.array([c.quad.points for c in t.cells])
        assert (pts[..., 0] >= 0).all() and (pts[..., 0] <= w).all()
        assert (pts[..., 1] >= 0).all() and (pts[..., 1] <= h).all()

    def test_record_keeps_clean_labels(self):
        cfg = GenConfig(jitter_sigma=2.0, seed=6)
        rec = generate_record(cfg, 0)
        clean = generate_table(cfg, 0)
        assert rec.locations == clean.locations
        assert rec.quads != clean.quads


class TestWords:
    def test_inside_their_cell(self, gen_cfg):
        for i in range(20):
            t = generate_table(gen_cfg, i)
            words = generate_word_boxes(t, gen_cfg, i)
            assert len(words) == sum(len(c.text.split()) for c in t.cells)
            for w in words:
                cx0, cy0, cx1, cy1 = t.cell_by_id(w.cell_id).quad.bbox()
                x0, y0, x1, y1 = w.box
                assert cx0 <= x0 <= x1 <= cx1
                assert cy0 <= y0 < y1 <= cy1

    def test_drawn_count_without_text(self, gen_cfg):
        t = generate_table(gen_cfg, 0)
        t = t.model_copy(update={"cells": [c.model_copy(update={"text": None}) for c in t.cells]})
        words = generate_word_boxes(t, gen_cfg, 0)
        per_cell = np.bincount([w.cell_id for w in words], minlength=len(t.cells))
        lo, hi = gen_cfg.words_per_cell_range
        assert ((per_cell >= lo) & (per_cell <= hi)).all()


class TestClustering:
    def test_gap_clusters(self):
        assert cluster_to_grid([10, 11, 50, 52], 5) == [0, 0, 1, 1]
        assert cluster_to_grid([52, 10, 50, 11], 5) == [1, 0, 1, 0]

    def test_bad_input(self):
        with pytest.raises(ValueError):
            cluster_to_grid([], 1.0)
        with pytest.raises(ValueError):
            cluster_to_grid([1.0], 0.0)

    def test_recovers_plain_grid(self):
        cfg = GenConfig(span_prob=0.0, seed=12)
        for i in range(20):
            t = generate_table(cfg, i)
            words = generate_word_boxes(t, cfg, i)
            relabelled = cluster_word_grid(words)
            assert [(w.grid_row, w.grid_col) for w in relabelled] == [(w.grid_row, w.grid_col) for w in words]

    def test_recovers_spanning_grid(self):
        cfg = GenConfig(span_prob=0.1, seed=7)
        hits = total = 0
        for i in range(100):
            t = generate_table(cfg, i)
            words = generate_word_boxes(t, cfg, i)
            for truth, found in zip(words, cluster_word_grid(words)):
                hits += (truth.grid_row, truth.grid_col) == (found.grid_row, found.grid_col)
                total += 1
        assert total > 0
        assert hits / total >= 0.99

    def test_spanning_cell_lands_on_one_slot(self):
        words = [
            WordBox(box=(10, 10, 30, 20), grid_row=0, grid_col=0, cell_id=0),
            WordBox(box=(34, 10, 50, 20), grid_row=0, grid_col=0, cell_id=0),
            WordBox(box=(100, 10, 120, 20), grid_row=0, grid_col=1, cell_id=1),
        ]
        out = cluster_word_grid(words)
        assert [(w.grid_row, w.grid_col) for w in out] == [(0, 0), (0, 0), (0, 1)]


class TestLdpLabels:
    def test_pairs(self, gen_cfg):
        t = generate_table(gen_cfg, 1)
        words = generate_word_boxes(t, gen_cfg, 1)
        labels = ldp_labels(words, 50, 3)
        n = len(words)
        assert len(labels) == min(50, n * n)
        assert len({(p.a, p.b) for p in labels}) == len(labels)
        for p in labels:
            assert p.row_dist == words[p.a].grid_row - words[p.b].grid_row
            assert p.col_dist == words[p.a].grid_col - words[p.b].grid_col
            if p.a == p.b:
                assert (p.row_dist, p.col_dist) == (0, 0)

    def test_all_pairs_when_budget_allows(self):
        words = [WordBox(box=(k * 10, 0, k * 10 + 5, 5), grid_row=0, grid_col=k, cell_id=k) for k in range(3)]
        labels = ldp_labels(words, 100, 0)
        assert [(p.a, p.b) for p in labels] == [(a, b) for a in range(3) for b in range(3)]

    def test_empty(self):
        assert ldp_labels([], 10, 0) == []
