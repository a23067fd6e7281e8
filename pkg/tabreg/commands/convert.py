import argparse
import json
from pathlib import Path

from pydantic import ValidationError

from tabreg.commands.common import RunContext, UsageError, finish, write_json
from tabreg.stores.dataset_store import DatasetFormatError
from tabreg.table import Table, adjacency_triplets, markup_to_table, to_markup

MARKUP_SUFFIXES = {".html", ".htm", ".markup", ".txt"}


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("convert", help="convert between table JSON, markup and adjacency triplets")
    p.add_argument("--input", required=True)
    p.add_argument("--from", dest="source", choices=("json", "markup"), help="default: guessed from the file suffix")
    p.add_argument("--to", required=True, choices=("markup", "adjacency", "json"))
    p.add_argument("--with-text", action="store_true", help="carry cell text through the markup")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_convert)


def read_table(path: Path, source: str, with_text: bool) -> Table:
    raw = path.read_text(encoding="utf-8")
    if source == "markup":
        return markup_to_table(raw.strip(), with_text=with_text)
    try:
        return Table.from_json_dict(json.loads(raw))
    except json.JSONDecodeError as e:
        raise DatasetFormatError(path, e.lineno, f"invalid JSON: {e.msg}") from e
    except ValidationError as e:
        first = e.errors()[0]
        raise DatasetFormatError(path, 1, f"{'.'.join(str(p) for p in first['loc'])}: {first['msg']}") from e


def cmd_convert(args: argparse.Namespace, ctx: RunContext) -> int:
    src = Path(args.input)
    source = args.source or ("markup" if src.suffix.lower() in MARKUP_SUFFIXES else "json")
    if source == args.to:
        raise UsageError(f"input is already {source}")
    recorder = ctx.recorder("convert")
    recorder.set_config({"from": source, "to": args.to, "with_text": args.with_text})
    recorder.add_input(src)
    table = read_table(src, source, args.with_text)

    out = ctx.out(args.out)
    if args.to == "markup":
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(to_markup(table, with_text=args.with_text) + "\n", encoding="utf-8")
    elif args.to == "adjacency":
        write_json(out, [[a, b, axis.value] for a, b, axis in adjacency_triplets(table)])
    else:
        write_json(out, table.to_json_dict())
    finish(recorder, out)
    return 0
