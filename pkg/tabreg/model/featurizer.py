"""Per-cell features from quad geometry plus position-embedded corners."""
from typing import NamedTuple, Sequence

import numpy as np

from tabreg.autograd import Linear, Module, Parameter, Tensor, mul, relu, slice_lastdim
from tabreg.logger import get_logger
from tabreg.table.model import SpatialQuad

log = get_logger(__name__)

GEO_FEATURES = 12


def positional_embedding_2d(x: float, y: float, d: int, base: float = 10000.0) -> np.ndarray:
    """``[sin(x/B^(4k/d)), cos(x/B^(4k/d)) for k] ++ [same for y]``, length ``d``."""
    return positional_embedding_2d_batch(np.array([x]), np.array([y]), d, base)[0]


def positional_embedding_2d_batch(xs: np.ndarray, ys: np.ndarray, d: int, base: float = 10000.0) -> np.ndarray:
    if d % 4:
        raise ValueError(f"embedding width must be divisible by 4, got {d}")
    k = np.arange(d // 4, dtype=np.float64)
    inv = 1.0 / base ** (4.0 * k / d)

    def half(v: np.ndarray) -> np.ndarray:
        arg = np.asarray(v, dtype=np.float64)[:, None] * inv[None, :]
        out = np.empty((arg.shape[0], d // 2))
        out[:, 0::2] = np.sin(arg)
        out[:, 1::2] = np.cos(arg)
        return out

    return np.concatenate([half(xs), half(ys)], axis=1)


class CellFeatures(NamedTuple):
    h: Tensor
    centers: np.ndarray
    corners: np.ndarray


def quad_array(quads: Sequence[SpatialQuad]) -> np.ndarray:
    return np.array([q.points for q in quads], dtype=np.float64).reshape(len(quads), 4, 2)


def geometry_features(corners: np.ndarray, image_size: tuple[int, int]) -> np.ndarray:
    """[cx, cy, w, h] and the 8 corner offsets from the center, all divided by image size."""
    scale = np.array(image_size, dtype=np.float64)
    norm = corners / scale
    center = norm.mean(axis=1)
    wh = norm.max(axis=1) - norm.min(axis=1)
    offsets = (norm - center[:, None, :]).reshape(len(corners), 8)
    return np.concatenate([center, wh, offsets], axis=1)


class Featurizer(Module):
    """h = MLP(geometry) + sum_k w_k * PE(corner_k), with w_k starting at 0.25."""

    def __init__(self, d: int, rng: np.random.Generator, pe_base: float = 10000.0) -> None:
        self.d = d
        self.pe_base = pe_base
        self.geo_in = Linear(GEO_FEATURES, d, rng)
        self.geo_out = Linear(d, d, rng)
        self.corner_weights = Parameter(np.full(4, 0.25))

    def __call__(self, quads: Sequence[SpatialQuad], image_size: tuple[int, int]) -> CellFeatures:
        if not quads:
            raise ValueError("featurize needs at least one cell")
        corners = quad_array(quads)
        wh = corners.max(axis=1) - corners.min(axis=1)
        degenerate = int(np.count_nonzero((wh[:, 0] <= 0) | (wh[:, 1] <= 0)))
        if degenerate:
            log.warning("degenerate quads, using their centers", extra={"count": degenerate})

        geo = Tensor(geometry_features(corners, image_size))
        h = self.geo_out(relu(self.geo_in(geo)))
        scale = np.array(image_size, dtype=np.float64)
        for k in range(4):
            pts = corners[:, k, :] / scale
            pe = Tensor(positional_embedding_2d_batch(pts[:, 0], pts[:, 1], self.d, self.pe_base))
            h = h + mul(pe, slice_lastdim(self.corner_weights, k, k + 1))
        return CellFeatures(h=h, centers=corners.mean(axis=1), corners=corners)


def featurize(quads: Sequence[SpatialQuad], image_size: tuple[int, int], featurizer: Featurizer) -> CellFeatures:
    return featurizer(quads, image_size)
