import argparse

from tabreg.commands.common import RunContext, finish, write_json
from tabreg.logger import get_logger
from tabreg.stores.dataset_store import DatasetStore
from tabreg.table import validate_table

log = get_logger(__name__)


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("validate", help="check every table of a dataset against the table invariants")
    p.add_argument("--input", required=True, help="NDJSON dataset")
    p.add_argument("--out", help="optional JSON report of all violations")
    p.set_defaults(handler=cmd_validate)


def cmd_validate(args: argparse.Namespace, ctx: RunContext) -> int:
    recorder = ctx.recorder("validate")
    recorder.add_input(args.input)
    findings = []
    tables = 0
    for rec in DatasetStore(args.input).iter_records():
        tables += 1
        for v in validate_table(rec):
            findings.append({"table_id": rec.table_id, **v.model_dump()})
            log.warning("invariant violated", extra={"table_id": rec.table_id, "rule": v.rule, "cells": v.cell_ids})

    if args.out:
        out = write_json(ctx.out(args.out), {"tables": tables, "violations": findings})
        finish(recorder, out)
    print(f"{tables} tables, {len(findings)} violations")
    return 1 if findings else 0
