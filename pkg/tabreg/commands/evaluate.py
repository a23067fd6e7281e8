import argparse

from tabreg.commands.common import RunContext, finish, write_json
from tabreg.metrics.report import ALL_METRICS, evaluate_dataset, pair_by_id
from tabreg.stores.dataset_store import DatasetStore


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("eval", help="score predicted tables against ground truth")
    p.add_argument("--pred", required=True, help="predicted NDJSON")
    p.add_argument("--gt", required=True, help="ground-truth NDJSON")
    p.add_argument("--iou", type=float, default=0.5, help="matching threshold, strict")
    p.add_argument("--metric", action="append", choices=ALL_METRICS, help="repeat to select a subset (default: all)")
    p.add_argument("--teds-text", action="store_true", help="score cell text in TEDS")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="report JSON")
    p.set_defaults(handler=cmd_eval)


def cmd_eval(args: argparse.Namespace, ctx: RunContext) -> int:
    metrics = args.metric or list(ALL_METRICS)
    recorder = ctx.recorder("eval")
    recorder.set_config({"iou_threshold": args.iou, "metrics": sorted(metrics), "teds_text": args.teds_text})
    recorder.add_input(args.pred)
    recorder.add_input(args.gt)
    pairs = pair_by_id(DatasetStore(args.pred).read(), DatasetStore(args.gt).read())

    report = evaluate_dataset(pairs, iou_threshold=args.iou, metrics=metrics, workers=args.workers, teds_text=args.teds_text)
    out = write_json(ctx.out(args.out), report.model_dump(mode="json", exclude_none=True))
    finish(recorder, out)
    print(report.summary())
    return 0
