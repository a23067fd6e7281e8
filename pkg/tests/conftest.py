import numpy as np
import pytest

from tabreg.model.config import ModelConfig
from tabreg.synth.config import GenConfig
from tabreg.synth.generator import generate_table
from tabreg.table import Table


def random_tables(count: int, seed: int, span_probs=(0.0, 0.1, 0.3), max_size: int = 8) -> list[Table]:
    tables = []
    for i in range(count):
        cfg = GenConfig(
            rows_range=(1, max_size),
            cols_range=(1, max_size),
            span_prob=span_probs[i % len(span_probs)],
            seed=seed,
        )
        tables.append(generate_table(cfg, i))
    return tables


def grid_owner(t: Table) -> np.ndarray:
    owner = np.full((t.n_rows, t.n_cols), -1, dtype=np.int64)
    for cell in t.cells:
        for r, c in cell.logical.slots():
            owner[r, c] = cell.id
    return owner


@pytest.fixture
def gen_cfg() -> GenConfig:
    return GenConfig(rows_range=(2, 5), cols_range=(2, 5), span_prob=0.2, seed=7)


@pytest.fixture
def tiny_model_cfg() -> ModelConfig:
    return ModelConfig(d=8, heads=2, layers_base=1, layers_stack=1)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
