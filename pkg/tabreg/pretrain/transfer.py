import statistics
from typing import Any, Mapping, Sequence

import numpy as np
from pydantic import BaseModel

from tabreg.logger import get_logger
from tabreg.model.config import ModelConfig, TrainConfig
from tabreg.model.regressor import LoreModel, encoder_prefixes
from tabreg.model.trainer import train
from tabreg.table.model import Table

log = get_logger(__name__)

ENCODER_FIELDS = ("d", "heads", "pe_frequency_base")


class TransferError(ValueError):
    def __init__(self, differing_fields: Sequence[str]) -> None:
        self.differing_fields = list(differing_fields)
        super().__init__(f"pre-trained encoder does not fit the fine-tune config: {', '.join(self.differing_fields)}")


def config_mismatch(ldp_cfg: ModelConfig, fine_cfg: ModelConfig) -> list[str]:
    out = [
        f"{f} (pre-trained {getattr(ldp_cfg, f)}, fine-tune {getattr(fine_cfg, f)})"
        for f in ENCODER_FIELDS
        if getattr(ldp_cfg, f) != getattr(fine_cfg, f)
    ]
    targets = ["layers_base"] + (["layers_stack"] if fine_cfg.enable_stacking else [])
    for f in targets:
        if getattr(fine_cfg, f) != ldp_cfg.layers_base:
            out.append(f"{f} (pre-trained {ldp_cfg.layers_base}, fine-tune {getattr(fine_cfg, f)})")
    return out


def transfer(
    ldp_state: Mapping[str, np.ndarray],
    ldp_cfg: ModelConfig,
    fine_cfg: ModelConfig,
    seed: int,
) -> LoreModel:
    """Fresh regressor whose featurizer and every encoder copy the pre-trained weights.

    Output heads and the stacking projection keep their fresh initialisation.
    """
    differing = config_mismatch(ldp_cfg, fine_cfg)
    if differing:
        raise TransferError(differing)

    model = LoreModel(fine_cfg, seed)
    state: dict[str, np.ndarray] = {}
    for name, value in ldp_state.items():
        if name.startswith("featurizer."):
            state[name] = value
        elif name.startswith("encoder."):
            for prefix in encoder_prefixes(model):
                state[prefix + name[len("encoder."):]] = value
    loaded = model.load_state_dict(state, strict=False)
    log.info("encoder transferred", extra={"tensors": len(loaded), "targets": encoder_prefixes(model)})
    return model


class TransferStudy(BaseModel):
    seeds: list[int]
    scratch_curves: list[list[float]]
    transfer_curves: list[list[float]]
    scratch_median: list[float]
    transfer_median: list[float]
    margin: float
    non_inferior: bool
    worst_gap: float

    def rows(self) -> list[dict[str, Any]]:
        return [
            {"epoch": e, "scratch": s, "transfer": t}
            for e, (s, t) in enumerate(zip(self.scratch_median, self.transfer_median))
        ]


def _curve(history: list[dict[str, Any]]) -> list[float]:
    return [row["heldout_accuracy"] for row in history if "heldout_accuracy" in row]


def transfer_study(
    corpus: Sequence[Table],
    heldout: Sequence[Table],
    seeds: Sequence[int],
    ldp_state: Mapping[str, np.ndarray],
    ldp_cfg: ModelConfig,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    margin: float = 0.01,
) -> TransferStudy:
    """Held-out accuracy per epoch, from scratch vs transferred init, at an equal training budget."""
    if not heldout:
        raise ValueError("transfer study needs held-out tables")
    scratch, transferred = [], []
    for seed in seeds:
        cfg = train_cfg.model_copy(update={"seed": seed})
        scratch.append(_curve(train(corpus, model_cfg, cfg, heldout).history))
        init = transfer(ldp_state, ldp_cfg, model_cfg, seed).state_dict()
        transferred.append(_curve(train(corpus, model_cfg, cfg, heldout, init_state=init).history))
        log.info("transfer study seed finished", extra={"seed": seed})

    s_med = [statistics.median(col) for col in zip(*scratch)]
    t_med = [statistics.median(col) for col in zip(*transferred)]
    gaps = [t - s for s, t in zip(s_med, t_med)]
    worst = min(gaps) if gaps else 0.0
    return TransferStudy(
        seeds=list(seeds),
        scratch_curves=scratch,
        transfer_curves=transferred,
        scratch_median=s_med,
        transfer_median=t_med,
        margin=margin,
        non_inferior=worst >= -margin,
        worst_gap=worst,
    )
