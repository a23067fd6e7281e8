import argparse

from tabreg.commands.common import RunContext, UsageError
from tabreg.logger import get_logger
from tabreg.utils import read_manifest

log = get_logger(__name__)


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("--manifest", required=True)
    p.set_defaults(handler=cmd_replay)


def cmd_replay(args: argparse.Namespace, ctx: RunContext) -> int:
    from tabreg.main import main

    manifest = read_manifest(args.manifest)
    if not manifest.argv or manifest.command == "replay":
        raise UsageError(f"{args.manifest} does not record a replayable command")
    log.info("replaying", extra={"command": manifest.command, "argv": manifest.argv})
    return main(manifest.argv)
