"""Seeded synthetic tables.

Every random draw comes from a stream addressed by (seed, purpose, index), so
a record depends only on its own index and parallel generation matches serial.
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from tqdm import tqdm

from tabreg.logger import get_logger
from tabreg.stores.dataset_store import DatasetRecord, record_from_table
from tabreg.synth.config import GenConfig
from tabreg.synth.grid import WordBox, ldp_labels
from tabreg.table.model import Cell, LogicalLocation, SpatialQuad, Table
from tabreg.utils import SeedLike, as_generator, rng_stream

log = get_logger(__name__)

COL_WIDTH = (60.0, 160.0)
ROW_HEIGHT = (30.0, 48.0)
MARGIN = 10.0
WORD_GAP = 4.0
WORD_INSET = 2.0
_VOCAB = ("total", "year", "net", "cost", "id", "name", "value", "rate", "q1", "q2", "avg", "sum", "n/a", "12", "3.5", "7%")


def _boundaries(sizes: np.ndarray, extent: float) -> np.ndarray:
    scale = min(1.0, (extent - 2 * MARGIN) / float(sizes.sum()))
    return MARGIN + np.concatenate([[0.0], np.cumsum(sizes * scale)])


def _spans(rng: np.random.Generator, n_rows: int, n_cols: int, cfg: GenConfig) -> list[LogicalLocation]:
    owner = np.full((n_rows, n_cols), -1, dtype=np.int64)
    locations: list[LogicalLocation] = []
    for r in range(n_rows):
        for c in range(n_cols):
            if owner[r, c] >= 0:
                continue
            rs = cs = 1
            if cfg.span_prob > 0 and rng.random() < cfg.span_prob:
                rs = min(int(rng.integers(1, cfg.max_span + 1)), n_rows - r)
                cs = min(int(rng.integers(1, cfg.max_span + 1)), n_cols - c)
                # a span may not cover a slot already owned
                if (owner[r:r + rs, c:c + cs] >= 0).any():
                    rs = cs = 1
            owner[r:r + rs, c:c + cs] = len(locations)
            locations.append(LogicalLocation(start_row=r, end_row=r + rs - 1, start_col=c, end_col=c + cs - 1))
    return _split_orphaning_spans(locations, n_rows, n_cols)


def _split_orphaning_spans(locations: list[LogicalLocation], n_rows: int, n_cols: int) -> list[LogicalLocation]:
    """Split back into unit cells every span covering a row or column where no cell starts.

    Afterwards every row and column holds a start, so word anchors recover the
    grid indices. Splitting only adds starts; one pass suffices.
    """
    orphan_rows = set(range(n_rows)) - {l.start_row for l in locations}
    orphan_cols = set(range(n_cols)) - {l.start_col for l in locations}
    if not orphan_rows and not orphan_cols:
        return locations
    out: list[LogicalLocation] = []
    for l in locations:
        covers = any(l.start_row <= k <= l.end_row for k in orphan_rows) or any(
            l.start_col <= k <= l.end_col for k in orphan_cols
        )
        if covers:
            out.extend(LogicalLocation(start_row=r, end_row=r, start_col=c, end_col=c) for r, c in l.slots())
        else:
            out.append(l)
    return sorted(out, key=lambda l: (l.start_row, l.start_col))


def _text(rng: np.random.Generator, cfg: GenConfig) -> str:
    if rng.random() < cfg.empty_text_prob:
        return ""
    lo, hi = cfg.words_per_cell_range
    k = int(rng.integers(lo, hi + 1))
    return " ".join(_VOCAB[i] for i in rng.integers(0, len(_VOCAB), size=k))


def generate_table(cfg: GenConfig, index: int) -> Table:
    rng = rng_stream(cfg.seed, "table", index)
    n_rows = int(rng.integers(cfg.rows_range[0], cfg.rows_range[1] + 1))
    n_cols = int(rng.integers(cfg.cols_range[0], cfg.cols_range[1] + 1))
    width, height = cfg.image_size
    xs = _boundaries(rng.uniform(*COL_WIDTH, size=n_cols), width)
    ys = _boundaries(rng.uniform(*ROW_HEIGHT, size=n_rows), height)
    # keeps every quad non-degenerate on narrow rows and columns
    pad = min(cfg.cell_pad, 0.25 * float(np.diff(xs).min()), 0.25 * float(np.diff(ys).min()))

    cells = []
    for i, l in enumerate(_spans(rng, n_rows, n_cols, cfg)):
        quad = SpatialQuad.from_box(
            float(xs[l.start_col] + pad),
            float(ys[l.start_row] + pad),
            float(xs[l.end_col + 1] - pad),
            float(ys[l.end_row + 1] - pad),
        )
        cells.append(Cell(id=i, quad=quad, logical=l, text=_text(rng, cfg)))
    return Table(cells=cells, n_rows=n_rows, n_cols=n_cols, image_size=cfg.image_size)


def perturb_quads(t: Table, sigma: float, seed: SeedLike) -> Table:
    """Independent gaussian noise on every corner, clamped to the image."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0 or not t.cells:
        return t.model_copy(deep=True)
    rng = as_generator(seed, "jitter")
    width, height = t.image_size
    pts = np.array([c.quad.points for c in t.cells], dtype=np.float64)
    pts = pts + rng.normal(0.0, sigma, size=pts.shape)
    pts[..., 0] = np.clip(pts[..., 0], 0.0, float(width))
    pts[..., 1] = np.clip(pts[..., 1], 0.0, float(height))
    cells = [
        c.model_copy(update={"quad": SpatialQuad(points=tuple(map(tuple, p.tolist())))})
        for c, p in zip(t.cells, pts)
    ]
    return t.model_copy(update={"cells": cells})


def generate_word_boxes(t: Table, cfg: GenConfig, seed: SeedLike) -> list[WordBox]:
    """Words laid left to right along the top band of each cell.

    A cell with text gets one box per token; a cell without a text field gets
    a count drawn from ``words_per_cell_range``; text "" means no words.
    """
    rng = as_generator(seed, "words")
    if not t.cells:
        return []
    min_h = min(c.quad.bbox()[3] - c.quad.bbox()[1] for c in t.cells)
    word_h = float(np.clip(0.45 * min_h, 4.0, 20.0))
    lo, hi = cfg.words_per_cell_range

    words: list[WordBox] = []
    for cell in t.cells:
        if cell.text == "":
            continue
        k = len(cell.text.split()) if cell.text else int(rng.integers(lo, hi + 1))
        x0, y0, x1, _ = cell.quad.bbox()
        inner = max(0.0, (x1 - x0) - 2 * WORD_INSET - WORD_GAP * (k - 1))
        slot = inner / k
        x = x0 + WORD_INSET
        top = y0 + WORD_INSET
        for _ in range(k):
            w = slot * float(rng.uniform(0.5, 1.0))
            words.append(WordBox(
                box=(x, top, x + w, top + word_h),
                grid_row=cell.logical.start_row,
                grid_col=cell.logical.start_col,
                cell_id=cell.id,
            ))
            x += slot + WORD_GAP
    return words


def table_id(cfg: GenConfig, index: int) -> str:
    return f"synth-{cfg.seed}-{index:06d}"


def generate_record(cfg: GenConfig, index: int, max_pairs: int = 64) -> DatasetRecord:
    gt = generate_table(cfg, index)
    words = generate_word_boxes(gt, cfg, rng_stream(cfg.seed, "words", index))
    labels = ldp_labels(words, max_pairs, rng_stream(cfg.seed, "ldp", index))
    observed = perturb_quads(gt, cfg.jitter_sigma, rng_stream(cfg.seed, "jitter", index))
    return record_from_table(observed, table_id(cfg, index), words=words, ldp_labels=labels)


def generate_records(
    cfg: GenConfig,
    count: int,
    max_pairs: int = 64,
    workers: int = 1,
    start: int = 0,
    progress: bool = False,
) -> list[DatasetRecord]:
    """Records ``start .. start+count-1`` in index order, whatever the worker count."""
    indices = range(start, start + count)
    bar = tqdm(total=count, desc="generate", disable=not progress, leave=False)
    try:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                out = []
                for rec in pool.map(lambda i: generate_record(cfg, i, max_pairs), indices):
                    out.append(rec)
                    bar.update(1)
        else:
            out = []
            for i in indices:
                out.append(generate_record(cfg, i, max_pairs))
                bar.update(1)
    finally:
        bar.close()
    log.info("records generated", extra={"count": count, "seed": cfg.seed, "workers": workers})
    return out
