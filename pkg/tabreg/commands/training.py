import argparse
from pathlib import Path

from tabreg.commands.common import (
    LDP,
    REGRESSOR,
    RunContext,
    UsageError,
    add_model_flags,
    finish,
    int_list,
    load_ldp,
    load_regressor,
    model_config,
    save_model,
    str_list,
    write_json,
)
from tabreg.logger import get_logger
from tabreg.model.ablation import ablate
from tabreg.model.config import ABLATION_PRESETS, TrainConfig
from tabreg.model.trainer import predict_table, train
from tabreg.pretrain.trainer import PretrainConfig, pretrain
from tabreg.pretrain.transfer import transfer, transfer_study
from tabreg.stores.dataset_store import DatasetStore, record_from_table
from tabreg.stores.history_store import HistoryStore

log = get_logger(__name__)


def _add_train_flags(p: argparse.ArgumentParser, epochs: int = 100) -> None:
    p.add_argument("--data", required=True, help="training NDJSON")
    p.add_argument("--heldout", help="held-out NDJSON, evaluated every epoch")
    p.add_argument("--epochs", type=int, default=epochs)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=1)
    p.add_argument("--weight-decay", type=float, default=0.0)
    p.add_argument("--train-fraction", type=float, default=1.0, help="train on a prefix, epochs scaled by 1/f")
    p.add_argument("--seed", type=int, required=True)


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("pretrain", help="logical-distance pre-training on word boxes")
    add_model_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--heldout")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=1)
    p.add_argument("--weight-decay", type=float, default=0.05)
    p.add_argument("--warmup-frac", type=float, default=0.05)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.set_defaults(handler=cmd_pretrain)

    for name, helptext in (("train", "train the cascade regressor"), ("finetune", "train starting from a pre-trained encoder")):
        p = sub.add_parser(name, help=helptext)
        add_model_flags(p)
        _add_train_flags(p)
        p.add_argument("--init-from", required=name == "finetune", help="pre-trained distance checkpoint")
        p.add_argument("--out", required=True, help="checkpoint path")
        p.add_argument("--history", help="per-epoch NDJSON (default: <out>.history.ndjson)")
        p.set_defaults(handler=cmd_train)

    p = sub.add_parser("predict", help="predict logical locations for every table")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="predicted tables NDJSON")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("ablate", help="objective / cascade ablation matrix")
    add_model_flags(p)
    _add_train_flags(p, epochs=30)
    p.add_argument("--presets", type=str_list, default=list(ABLATION_PRESETS))
    p.add_argument("--seeds", type=int_list, default=[0, 1, 2, 3, 4])
    p.add_argument("--out", required=True, help="ablation matrix JSON")
    p.set_defaults(handler=cmd_ablate)

    p = sub.add_parser("transfer-study", help="from-scratch vs transferred fine-tuning curves")
    add_model_flags(p)
    _add_train_flags(p, epochs=30)
    p.add_argument("--ldp-ckpt", required=True)
    p.add_argument("--seeds", type=int_list, default=[0, 1, 2, 3, 4])
    p.add_argument("--margin", type=float, default=0.01)
    p.add_argument("--out", required=True, help="comparison JSON")
    p.set_defaults(handler=cmd_transfer_study)


def _train_config(args: argparse.Namespace, seed: int) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        lr=args.lr,
        batch_size=args.batch_size,
        weight_decay=args.weight_decay,
        train_fraction=args.train_fraction,
        seed=seed,
    )


def _read(recorder, path: str) -> list:
    recorder.add_input(path)
    return DatasetStore(path).read()


def cmd_pretrain(args: argparse.Namespace, ctx: RunContext) -> int:
    mcfg = model_config(args)
    pcfg = PretrainConfig(
        epochs=args.epochs,
        lr=args.lr,
        batch_size=args.batch_size,
        weight_decay=args.weight_decay,
        warmup_frac=args.warmup_frac,
        seed=args.seed,
    )
    recorder = ctx.recorder("pretrain", [args.seed])
    recorder.set_config({"model": mcfg.model_dump(mode="json"), "pretrain": pcfg.model_dump(mode="json")})
    records = _read(recorder, args.data)
    heldout = _read(recorder, args.heldout) if args.heldout else []

    result = pretrain(records, mcfg, pcfg, heldout, progress=True)
    out = ctx.out(args.out)
    save_model(out, result.model, LDP, {"model": mcfg.model_dump(mode="json"), "pretrain": pcfg.model_dump(mode="json")})
    history = HistoryStore(Path(f"{out}.history.ndjson")).write(result.history)
    finish(recorder, out, history)
    return 0


def cmd_train(args: argparse.Namespace, ctx: RunContext) -> int:
    mcfg = model_config(args)
    tcfg = _train_config(args, args.seed)
    recorder = ctx.recorder(args.command, [args.seed])
    recorder.set_config({
        "model": mcfg.model_dump(mode="json"),
        "train": tcfg.model_dump(mode="json"),
        "init_from": args.init_from,
    })
    records = _read(recorder, args.data)
    heldout = _read(recorder, args.heldout) if args.heldout else []

    init_state = None
    if args.init_from:
        recorder.add_input(args.init_from)
        ldp, _ = load_ldp(args.init_from)
        init_state = transfer(ldp.state_dict(), ldp.cfg, mcfg, args.seed).state_dict()

    result = train(records, mcfg, tcfg, heldout, init_state=init_state, progress=True)
    out = ctx.out(args.out)
    save_model(out, result.model, REGRESSOR, {"model": mcfg.model_dump(mode="json"), "train": tcfg.model_dump(mode="json")})
    history = HistoryStore(ctx.out(args.history) if args.history else Path(f"{out}.history.ndjson")).write(result.history)
    finish(recorder, out, history)
    return 0


def cmd_predict(args: argparse.Namespace, ctx: RunContext) -> int:
    recorder = ctx.recorder("predict")
    recorder.add_input(args.ckpt)
    model, ckpt = load_regressor(args.ckpt)
    recorder.set_config({"checkpoint": ckpt.config})
    records = _read(recorder, args.data)

    predicted = (record_from_table(predict_table(model, r), r.table_id) for r in records)
    out = ctx.out(args.out)
    n = DatasetStore(out).write(predicted)
    finish(recorder, out)
    log.info("predictions written", extra={"tables": n, "path": str(out)})
    return 0


def cmd_ablate(args: argparse.Namespace, ctx: RunContext) -> int:
    if not args.heldout:
        raise UsageError("ablate needs --heldout")
    unknown = sorted(set(args.presets) - set(ABLATION_PRESETS))
    if unknown or not args.seeds:
        raise UsageError(f"unknown presets {unknown}" if unknown else "--seeds is empty")
    mcfg = model_config(args)
    tcfg = _train_config(args, args.seeds[0])
    recorder = ctx.recorder("ablate", args.seeds)
    recorder.set_config({"model": mcfg.model_dump(mode="json"), "train": tcfg.model_dump(mode="json"), "presets": args.presets})
    records = _read(recorder, args.data)
    heldout = _read(recorder, args.heldout)

    matrix = ablate(records, heldout, args.presets, args.seeds, mcfg, tcfg)
    out = write_json(ctx.out(args.out), matrix.model_dump(mode="json"))
    finish(recorder, out)
    for row in matrix.rows:
        print(f"{row.preset}  A-c {row.acc_col:.4f}  A-r {row.acc_row:.4f}  Acc {row.acc:.4f}")
    return 0


def cmd_transfer_study(args: argparse.Namespace, ctx: RunContext) -> int:
    if not args.heldout:
        raise UsageError("transfer-study needs --heldout")
    mcfg = model_config(args)
    tcfg = _train_config(args, args.seeds[0] if args.seeds else args.seed)
    recorder = ctx.recorder("transfer-study", args.seeds)
    recorder.set_config({"model": mcfg.model_dump(mode="json"), "train": tcfg.model_dump(mode="json"), "margin": args.margin})
    records = _read(recorder, args.data)
    heldout = _read(recorder, args.heldout)
    recorder.add_input(args.ldp_ckpt)
    ldp, _ = load_ldp(args.ldp_ckpt)

    study = transfer_study(records, heldout, args.seeds, ldp.state_dict(), ldp.cfg, mcfg, tcfg, args.margin)
    out = write_json(ctx.out(args.out), study.model_dump(mode="json"))
    finish(recorder, out)
    print(f"non_inferior={study.non_inferior} worst_gap={study.worst_gap:.4f}")
    return 0
