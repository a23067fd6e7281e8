import math
from typing import Any, NamedTuple, Optional, Sequence

from pydantic import BaseModel, Field, PositiveInt
from tqdm import tqdm

from tabreg.autograd import Adam, LinearWarmup, no_grad
from tabreg.logger import get_logger
from tabreg.model.config import ModelConfig
from tabreg.model.trainer import TrainingDivergedError
from tabreg.pretrain.ldp import LdpModel, label_array, ldp_forward, ldp_loss
from tabreg.stores.dataset_store import DatasetRecord
from tabreg.utils import rng_stream

log = get_logger(__name__)


class PretrainConfig(BaseModel):
    epochs: PositiveInt = 20
    lr: float = Field(default=1e-3, gt=0.0)
    betas: tuple[float, float] = (0.0, 0.95)
    weight_decay: float = Field(default=0.05, ge=0.0)
    warmup_frac: float = Field(default=0.05, ge=0.0, lt=1.0, description="share of steps with linear lr warm-up")
    batch_size: PositiveInt = 1
    seed: int


class PretrainResult(NamedTuple):
    model: LdpModel
    history: list[dict[str, Any]]


def usable(records: Sequence[DatasetRecord]) -> list[DatasetRecord]:
    return [r for r in records if r.words and r.ldp_labels]


def ldp_mae(model: LdpModel, records: Sequence[DatasetRecord]) -> Optional[float]:
    """Mean absolute distance error over every labelled pair."""
    total, count = 0.0, 0
    with no_grad():
        for r in usable(records):
            pred = ldp_forward(model, r.words, [(l.a, l.b) for l in r.ldp_labels], r.image_size)
            target = label_array(r.ldp_labels)
            total += float(abs(pred.numpy() - target).sum())
            count += target.size
    return total / count if count else None


def pretrain(
    records: Sequence[DatasetRecord],
    model_cfg: ModelConfig,
    cfg: PretrainConfig,
    heldout: Sequence[DatasetRecord] = (),
    progress: bool = False,
) -> PretrainResult:
    corpus = usable(records)
    if not corpus:
        raise ValueError("pre-training corpus has no records with word boxes and distance labels")

    model = LdpModel(model_cfg, cfg.seed)
    opt = Adam(model.parameters(), lr=cfg.lr, betas=cfg.betas, weight_decay=cfg.weight_decay)
    steps_per_epoch = math.ceil(len(corpus) / cfg.batch_size)
    schedule = LinearWarmup(cfg.lr, cfg.epochs * steps_per_epoch, cfg.warmup_frac)

    history: list[dict[str, Any]] = []
    last_finite: Optional[float] = None
    step = 0
    for epoch in tqdm(range(cfg.epochs), desc="pretrain", disable=not progress, leave=False):
        order = rng_stream(cfg.seed, "ldp-shuffle", epoch).permutation(len(corpus))
        running = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            opt.lr = schedule(step)
            for i in batch.tolist():
                r = corpus[i]
                pred = ldp_forward(model, r.words, [(l.a, l.b) for l in r.ldp_labels], r.image_size)
                loss = ldp_loss(pred, r.ldp_labels)
                value = loss.item()
                if not math.isfinite(value):
                    raise TrainingDivergedError(epoch, last_finite)
                last_finite = value
                (loss * (1.0 / len(batch))).backward()
                running += value
            opt.step()
            step += 1

        row: dict[str, Any] = {"epoch": epoch, "lr": opt.lr, "loss": running / len(corpus)}
        if heldout:
            row["heldout_mae"] = ldp_mae(model, heldout)
        history.append(row)
        log.info("pretrain epoch finished", extra=row)
    return PretrainResult(model=model, history=history)
