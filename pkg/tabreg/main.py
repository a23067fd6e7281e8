import argparse
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from tabreg import __version__
from tabreg.autograd import ShapeError
from tabreg.commands import COMMAND_MODULES
from tabreg.commands.common import RunContext, UsageError
from tabreg.logger import get_logger, setup_logging
from tabreg.metrics.report import EvaluationInputError
from tabreg.model.trainer import TrainingDivergedError
from tabreg.pretrain.transfer import TransferError
from tabreg.stores.checkpoint_store import CheckpointError
from tabreg.stores.dataset_store import DatasetFormatError
from tabreg.table import MarkupParseError
from tabreg.utils import Settings

log = get_logger(__name__)

DOMAIN_ERRORS = (
    MarkupParseError,
    DatasetFormatError,
    CheckpointError,
    ShapeError,
    TrainingDivergedError,
    TransferError,
    EvaluationInputError,
    OSError,
    ValueError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tabreg", description="table logical-location regression toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="overrides LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for module in COMMAND_MODULES:
        module.register(sub)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = Settings.from_env()
    setup_logging(args.log_level or settings.log_level, settings.log_format)

    try:
        return args.handler(args, RunContext(argv, settings))
    except (UsageError, ValidationError) as e:
        log.error("usage error", extra={"command": args.command, "error": str(e)})
        return 2
    except DOMAIN_ERRORS as e:
        log.error(str(e), extra={"command": args.command, "error_type": type(e).__name__})
        return 1


if __name__ == "__main__":
    sys.exit(main())
