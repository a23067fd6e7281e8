"""Pairwise logical-distance head over word boxes."""
from typing import Sequence

import numpy as np

from tabreg.autograd import Encoder, Linear, Module, Tensor, abs_sum, concat_lastdim, gather_rows, scalar_mul
from tabreg.model.config import ModelConfig
from tabreg.model.featurizer import Featurizer
from tabreg.synth.grid import LdpPairLabel, WordBox
from tabreg.table.model import SpatialQuad
from tabreg.utils import rng_stream


class LdpModel(Module):
    """Featurizer and encoder shaped like a regressor stage, plus a 2d -> 2 pair head."""

    def __init__(self, cfg: ModelConfig, seed: int) -> None:
        self.cfg = cfg
        rng = rng_stream(seed, "ldp-init")
        self.featurizer = Featurizer(cfg.d, rng, cfg.pe_frequency_base)
        self.encoder = Encoder(cfg.d, cfg.heads, cfg.layers_base, rng)
        self.pair_head = Linear(2 * cfg.d, 2, rng)


def word_quads(words: Sequence[WordBox]) -> list[SpatialQuad]:
    return [SpatialQuad.from_box(*w.box) for w in words]


def ldp_forward(
    model: LdpModel,
    words: Sequence[WordBox],
    pairs: Sequence[tuple[int, int]],
    image_size: tuple[int, int],
) -> Tensor:
    """Predicted (row_dist, col_dist) per pair, shape |pairs| x 2."""
    feats = model.featurizer(word_quads(words), image_size)
    encoded = model.encoder(feats.h)
    a = np.array([p[0] for p in pairs], dtype=np.int64)
    b = np.array([p[1] for p in pairs], dtype=np.int64)
    return model.pair_head(concat_lastdim([gather_rows(encoded, a), gather_rows(encoded, b)]))


def label_array(labels: Sequence[LdpPairLabel]) -> np.ndarray:
    return np.array([[l.row_dist, l.col_dist] for l in labels], dtype=np.float64).reshape(-1, 2)


def ldp_loss(pred: Tensor, labels: np.ndarray | Sequence[LdpPairLabel]) -> Tensor:
    """Mean absolute error over pairs and both axes."""
    target = labels if isinstance(labels, np.ndarray) else label_array(labels)
    return scalar_mul(abs_sum(pred - target), 1.0 / max(target.size, 1))
