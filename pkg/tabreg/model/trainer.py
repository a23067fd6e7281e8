import math
from typing import Any, Iterable, Mapping, NamedTuple, Optional, Sequence

import numpy as np
from tqdm import tqdm

from tabreg.autograd import Adam, OpCounter, StepDecay, no_grad
from tabreg.logger import get_logger
from tabreg.metrics.report import MetricsReport, evaluate_dataset
from tabreg.model.config import ModelConfig, TrainConfig
from tabreg.model.losses import build_adjacent_pairs, loss_total
from tabreg.model.regressor import LoreModel, round_to_logical
from tabreg.table.model import Cell, LogicalLocation, Table
from tabreg.utils import rng_stream

log = get_logger(__name__)


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int, last_finite_loss: Optional[float]) -> None:
        super().__init__(f"loss became non-finite in epoch {epoch} (last finite loss {last_finite_loss})")
        self.epoch = epoch
        self.last_finite_loss = last_finite_loss


class Prediction(NamedTuple):
    locations: list[LogicalLocation]
    raw: np.ndarray
    repaired: list[bool]
    op_count: int


class TrainResult(NamedTuple):
    model: LoreModel
    history: list[dict[str, Any]]


def training_subset(records: Sequence[Table], cfg: TrainConfig) -> tuple[Sequence[Table], int]:
    """Prefix of ``train_fraction`` of the records and the epoch count that keeps total steps equal."""
    if cfg.train_fraction >= 1.0:
        return records, cfg.epochs
    n = max(1, int(math.ceil(cfg.train_fraction * len(records))))
    return records[:n], max(1, int(round(cfg.epochs / cfg.train_fraction)))


def train(
    records: Sequence[Table],
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    heldout: Sequence[Table] = (),
    init_state: Optional[Mapping[str, np.ndarray]] = None,
    progress: bool = False,
) -> TrainResult:
    if not records:
        raise ValueError("training needs at least one table")
    records, epochs = training_subset(records, train_cfg)
    records = [r for r in records if r.cells]
    if not records:
        raise ValueError("training tables have no cells")

    model = LoreModel(model_cfg, train_cfg.seed)
    if init_state is not None:
        model.load_state_dict(init_state)
    opt = Adam(model.parameters(), lr=train_cfg.lr, betas=train_cfg.betas, weight_decay=train_cfg.weight_decay)
    schedule = StepDecay(train_cfg.lr, epochs, train_cfg.lr_milestones, train_cfg.lr_factor)
    pairs = [build_adjacent_pairs(r) for r in records]

    history: list[dict[str, Any]] = []
    last_finite: Optional[float] = None
    for epoch in tqdm(range(epochs), desc="train", disable=not progress, leave=False):
        opt.lr = schedule(epoch)
        order = rng_stream(train_cfg.seed, "shuffle", epoch).permutation(len(records))
        sums = {"loss": 0.0, "loss_log": 0.0, "loss_inter": 0.0, "loss_intra": 0.0}

        for start in range(0, len(order), train_cfg.batch_size):
            batch = order[start:start + train_cfg.batch_size]
            for i in batch.tolist():
                t = records[i]
                pred = model(t.quads, t.image_size)
                parts = loss_total(pred.l_base, pred.l_stack, t, model_cfg, pairs[i])
                value = parts.total.item()
                if not math.isfinite(value):
                    raise TrainingDivergedError(epoch, last_finite)
                last_finite = value
                (parts.total * (1.0 / len(batch))).backward()
                sums["loss"] += value
                sums["loss_log"] += parts.log
                sums["loss_inter"] += parts.inter
                sums["loss_intra"] += parts.intra
            opt.step()

        row: dict[str, Any] = {"epoch": epoch, "lr": opt.lr}
        row.update({k: v / len(records) for k, v in sums.items()})
        if heldout and ((epoch + 1) % train_cfg.eval_every == 0 or epoch == epochs - 1):
            row["heldout_accuracy"] = evaluate(model, heldout).logical_accuracy
        history.append(row)
        log.info("epoch finished", extra=row)
    return TrainResult(model=model, history=history)


def predict(model: LoreModel, table: Table) -> Prediction:
    """One parallel forward pass over all cells; no iterative decoding."""
    if not table.cells:
        return Prediction([], np.zeros((0, 4)), [], 0)
    with no_grad(), OpCounter() as counter:
        out = model(table.quads, table.image_size)
    raw = out.l_stack.numpy().copy()
    rounded = round_to_logical(raw)
    return Prediction(rounded.locations, raw, rounded.repaired, counter.count)


def predict_table(model: LoreModel, table: Table) -> Table:
    """Same cells and quads as ``table`` with predicted logical locations."""
    pred = predict(model, table)
    cells = [
        Cell(id=c.id, quad=c.quad, logical=loc, text=c.text)
        for c, loc in zip(table.cells, pred.locations)
    ]
    n_rows = max((l.end_row for l in pred.locations), default=0) + 1
    n_cols = max((l.end_col for l in pred.locations), default=0) + 1
    return Table(cells=cells, n_rows=n_rows, n_cols=n_cols, image_size=table.image_size)


def evaluate(model: LoreModel, tables: Iterable[Table], metrics: Sequence[str] = ("logical",)) -> MetricsReport:
    tables = list(tables)
    pairs = [(predict_table(model, t), t) for t in tables]
    return evaluate_dataset(pairs, metrics=metrics)
