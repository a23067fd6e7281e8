import statistics
from typing import Optional, Sequence

from pydantic import BaseModel, Field

from tabreg.logger import get_logger
from tabreg.model.config import ABLATION_PRESETS, ModelConfig, TrainConfig
from tabreg.model.trainer import evaluate, train
from tabreg.table.model import Table

log = get_logger(__name__)


class SeedResult(BaseModel):
    seed: int
    acc_col: float
    acc_row: float
    acc: float
    num_parameters: int


class AblationRow(BaseModel):
    preset: str
    inter: bool
    intra: bool
    cascade: bool
    acc_col: float = Field(description="median column accuracy over seeds (A-c)")
    acc_row: float = Field(description="median row accuracy over seeds (A-r)")
    acc: float = Field(description="median logical accuracy over seeds (Acc)")
    runs: list[SeedResult]


class AblationMatrix(BaseModel):
    base_config: ModelConfig
    train_config: TrainConfig
    seeds: list[int]
    rows: list[AblationRow]

    def row(self, preset: str) -> AblationRow:
        for r in self.rows:
            if r.preset == preset:
                return r
        raise KeyError(preset)


def ablate(
    train_tables: Sequence[Table],
    heldout: Sequence[Table],
    presets: Sequence[str] = ABLATION_PRESETS,
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    base_config: Optional[ModelConfig] = None,
    train_config: Optional[TrainConfig] = None,
) -> AblationMatrix:
    """Train every preset once per seed and report held-out medians."""
    if not seeds:
        raise ValueError("ablation needs at least one seed")
    base_config = base_config or ModelConfig()
    train_config = train_config or TrainConfig(seed=seeds[0])

    rows = []
    for preset in presets:
        cfg = ModelConfig.for_ablation(preset, base_config)
        runs = []
        for seed in seeds:
            result = train(train_tables, cfg, train_config.model_copy(update={"seed": seed}))
            report = evaluate(result.model, heldout)
            runs.append(SeedResult(
                seed=seed,
                acc_col=report.logical_accuracy_col or 0.0,
                acc_row=report.logical_accuracy_row or 0.0,
                acc=report.logical_accuracy or 0.0,
                num_parameters=result.model.num_parameters(),
            ))
            log.info("ablation run finished", extra={"preset": preset, "seed": seed, "acc": runs[-1].acc})
        rows.append(AblationRow(
            preset=preset,
            inter=cfg.enable_inter,
            intra=cfg.enable_intra,
            cascade=cfg.enable_stacking,
            acc_col=statistics.median(r.acc_col for r in runs),
            acc_row=statistics.median(r.acc_row for r in runs),
            acc=statistics.median(r.acc for r in runs),
            runs=runs,
        ))
    return AblationMatrix(base_config=base_config, train_config=train_config, seeds=list(seeds), rows=rows)
