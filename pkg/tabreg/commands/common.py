"""Flags and checkpoint glue shared by the subcommands."""
import argparse
import json
import os
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError

from tabreg.autograd import Module, ShapeError
from tabreg.model.config import ABLATION_PRESETS, ModelConfig
from tabreg.model.regressor import LoreModel
from tabreg.pretrain.ldp import LdpModel
from tabreg.stores.checkpoint_store import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from tabreg.utils import ManifestRecorder, Settings

REGRESSOR = "regressor"
LDP = "ldp"


class UsageError(ValueError):
    """Bad flag combination; reported like an argparse error."""


def int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def image_size(text: str) -> tuple[int, int]:
    w, _, h = text.lower().partition("x")
    try:
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {text!r}")


def add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--d", type=int, default=64, help="feature width")
    g.add_argument("--heads", type=int, default=4)
    g.add_argument("--layers-base", type=int, default=3)
    g.add_argument("--layers-stack", type=int, default=3)
    g.add_argument("--pe-base", type=float, default=10000.0, help="position embedding frequency base")
    g.add_argument("--no-stacking", action="store_true")
    g.add_argument("--no-inter", action="store_true")
    g.add_argument("--no-intra", action="store_true")
    g.add_argument("--inter-axis", choices=("ordered", "literal"), default="ordered")
    g.add_argument("--ablation", choices=ABLATION_PRESETS, default=None, help="apply an ablation preset on top of the flags")


def model_config(args: argparse.Namespace) -> ModelConfig:
    cfg = ModelConfig(
        d=args.d,
        heads=args.heads,
        layers_base=args.layers_base,
        layers_stack=args.layers_stack,
        pe_frequency_base=args.pe_base,
        enable_stacking=not args.no_stacking,
        enable_inter=not args.no_inter,
        enable_intra=not args.no_intra,
        inter_axis=args.inter_axis,
    )
    if args.ablation:
        cfg = ModelConfig.for_ablation(args.ablation, cfg)
    return cfg


def write_json(path: Path, payload: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def save_model(path: Path, model: Module, component: str, config: dict[str, Any]) -> Path:
    return save_checkpoint(path, Checkpoint(component=component, config=config, parameters=model.state_dict()))


def _restore(model: Module, ckpt: Checkpoint) -> None:
    try:
        model.load_state_dict(ckpt.parameters)
    except KeyError as e:
        raise CheckpointError("parameters", str(e.args[0]) if e.args else str(e)) from e
    except ShapeError as e:
        raise CheckpointError(e.op.removeprefix("load "), f"shape {e.shapes[1]} does not fit {e.shapes[0]}") from e


def _model_cfg(ckpt: Checkpoint) -> ModelConfig:
    try:
        return ModelConfig.model_validate(ckpt.config.get("model", {}))
    except ValidationError as e:
        first = e.errors()[0]
        raise CheckpointError("config.model." + ".".join(str(p) for p in first["loc"]), first["msg"]) from e


def load_regressor(path: str | os.PathLike) -> tuple[LoreModel, Checkpoint]:
    ckpt = load_checkpoint(path, component=REGRESSOR)
    model = LoreModel(_model_cfg(ckpt), seed=0)
    _restore(model, ckpt)
    return model, ckpt


def load_ldp(path: str | os.PathLike) -> tuple[LdpModel, Checkpoint]:
    ckpt = load_checkpoint(path, component=LDP)
    model = LdpModel(_model_cfg(ckpt), seed=0)
    _restore(model, ckpt)
    return model, ckpt


def finish(recorder: ManifestRecorder, primary: Path, *extra_outputs: Optional[Path]) -> None:
    recorder.add_output(primary)
    for p in extra_outputs:
        if p is not None:
            recorder.add_output(p)
    recorder.write(primary)


class RunContext:
    """What every handler gets besides its parsed flags."""

    def __init__(self, argv: list[str], settings: Settings) -> None:
        self.argv = list(argv)
        self.settings = settings

    def recorder(self, command: str, seeds: list[int] | tuple[int, ...] = ()) -> ManifestRecorder:
        return ManifestRecorder(command, self.argv, seeds)

    def out(self, path: str | os.PathLike) -> Path:
        return self.settings.resolve_output(path)
