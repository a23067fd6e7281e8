import argparse

from tabreg.commands.common import RunContext, UsageError, finish, image_size
from tabreg.logger import get_logger
from tabreg.stores.dataset_store import write_dataset
from tabreg.synth.config import GenConfig
from tabreg.synth.generator import generate_records

log = get_logger(__name__)


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("generate", help="write a synthetic NDJSON dataset")
    p.add_argument("--rows", default="2..8", help="row count range, e.g. 2..8")
    p.add_argument("--cols", default="2..8", help="column count range")
    p.add_argument("--span-prob", type=float, default=0.1)
    p.add_argument("--max-span", type=int, default=3)
    p.add_argument("--jitter", type=float, default=0.0, help="corner noise sigma in pixels")
    p.add_argument("--image-size", type=image_size, default=(1024, 768), help="WIDTHxHEIGHT")
    p.add_argument("--cell-pad", type=float, default=2.0)
    p.add_argument("--words-per-cell", default="1..3")
    p.add_argument("--empty-text-prob", type=float, default=0.0)
    p.add_argument("--max-pairs", type=int, default=64, help="distance labels per table")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--start", type=int, default=0, help="first record index")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_generate)


def cmd_generate(args: argparse.Namespace, ctx: RunContext) -> int:
    cfg = GenConfig(
        rows_range=args.rows,
        cols_range=args.cols,
        span_prob=args.span_prob,
        max_span=args.max_span,
        jitter_sigma=args.jitter,
        image_size=args.image_size,
        cell_pad=args.cell_pad,
        words_per_cell_range=args.words_per_cell,
        empty_text_prob=args.empty_text_prob,
        seed=args.seed,
    )
    if args.count < 0 or args.start < 0 or args.max_pairs < 0 or args.workers < 1:
        raise UsageError("--count, --start and --max-pairs must be >= 0 and --workers >= 1")

    recorder = ctx.recorder("generate", [cfg.seed])
    recorder.set_config({
        "gen": cfg.model_dump(mode="json"),
        "count": args.count,
        "start": args.start,
        "max_pairs": args.max_pairs,
    })
    records = generate_records(cfg, args.count, args.max_pairs, workers=args.workers, start=args.start, progress=True)
    out = ctx.out(args.out)
    n = write_dataset(out, records)
    finish(recorder, out)
    print(n)
    return 0
