"""Cascade logical-location regressor: base stage, then a stacking stage that re-reads the base output."""
import math
from typing import NamedTuple, Optional, Sequence

import numpy as np

from tabreg.autograd import Encoder, Linear, Module, Tensor, relu
from tabreg.model.config import ModelConfig
from tabreg.model.featurizer import Featurizer
from tabreg.table.model import LogicalLocation, SpatialQuad
from tabreg.utils import rng_stream


class LogicalPrediction(NamedTuple):
    l_base: Tensor
    l_stack: Tensor
    h_tilde: Tensor


class RoundedLocations(NamedTuple):
    locations: list[LogicalLocation]
    repaired: list[bool]


class RegressorStage(Module):
    """Attention encoder followed by relu(linear) onto (r_s, r_e, c_s, c_e)."""

    def __init__(self, d: int, heads: int, n_layers: int, rng: np.random.Generator) -> None:
        self.encoder = Encoder(d, heads, n_layers, rng)
        self.head = Linear(d, 4, rng)

    def __call__(self, h: Tensor) -> tuple[Tensor, Tensor]:
        h_tilde = self.encoder(h)
        return h_tilde, relu(self.head(h_tilde))


class LoreModel(Module):
    def __init__(self, cfg: ModelConfig, seed: int) -> None:
        self.cfg = cfg
        rng = rng_stream(seed, "init")
        self.featurizer = Featurizer(cfg.d, rng, cfg.pe_frequency_base)
        self.base = RegressorStage(cfg.d, cfg.heads, cfg.layers_base, rng)
        if cfg.enable_stacking:
            self.stack_proj = Linear(4, cfg.d, rng)
            self.stack = RegressorStage(cfg.d, cfg.heads, cfg.layers_stack, rng)

    def base_regress(self, h: Tensor) -> tuple[Tensor, Tensor]:
        return self.base(h)

    def stack_regress(self, h_tilde: Tensor, l_base: Tensor) -> Tensor:
        if not self.cfg.enable_stacking:
            return l_base
        _, l_stack = self.stack(self.stack_proj(l_base) + h_tilde)
        return l_stack

    def __call__(self, quads: Sequence[SpatialQuad], image_size: tuple[int, int]) -> LogicalPrediction:
        feats = self.featurizer(quads, image_size)
        h_tilde, l_base = self.base_regress(feats.h)
        return LogicalPrediction(l_base=l_base, l_stack=self.stack_regress(h_tilde, l_base), h_tilde=h_tilde)


def round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def round_to_logical(values: np.ndarray) -> RoundedLocations:
    """Nearest integer (half up), clamp at 0, swap start/end when reversed."""
    values = np.asarray(values, dtype=np.float64).reshape(-1, 4)
    locations, repaired = [], []
    for row in values:
        sr, er, sc, ec = (max(0, round_half_up(v)) for v in row)
        swapped = False
        if sr > er:
            sr, er, swapped = er, sr, True
        if sc > ec:
            sc, ec, swapped = ec, sc, True
        locations.append(LogicalLocation(start_row=sr, end_row=er, start_col=sc, end_col=ec))
        repaired.append(swapped)
    return RoundedLocations(locations, repaired)


def encoder_prefixes(model: LoreModel) -> list[str]:
    out = ["base.encoder."]
    if model.cfg.enable_stacking:
        out.append("stack.encoder.")
    return out


def parameter_names(model: Module, prefix: Optional[str] = None) -> list[str]:
    return [n for n, _ in model.named_parameters() if prefix is None or n.startswith(prefix)]
