import hashlib
import json
import os
import pathlib
import time
import zlib
from datetime import datetime, timezone
from typing import Any, Iterable

import numpy as np
from pydantic import BaseModel, Field

from tabreg import __version__
from tabreg.logger import get_logger

log = get_logger(__name__)

ROOT_DIR = pathlib.Path(__file__).parent.absolute()


class Settings(BaseModel):
    """Environment-level settings. Everything else is a command-line flag."""

    output_dir: pathlib.Path = Field(description="base directory for relative output paths", default=pathlib.Path("."))
    log_level: str = Field(description="root log level", default="INFO")
    log_format: str = Field(description="'console' or 'json'", default="console")

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            output_dir=pathlib.Path(os.getenv("TABREG_OUTPUT_DIR", ".")),
            log_level=os.getenv("LOG_LEVEL", "INFO"),
            log_format=os.getenv("LOG_FORMAT", "console"),
        )

    def resolve_output(self, path: str | os.PathLike) -> pathlib.Path:
        p = pathlib.Path(path)
        return p if p.is_absolute() else self.output_dir / p


def rng_stream(seed: int, *keys: int | str) -> np.random.Generator:
    """Counter-based random stream addressed by (seed, *keys).

    The same address always yields the same stream regardless of the order
    (or the thread) in which streams are created.
    """
    spawn_key = tuple(zlib.crc32(k.encode("utf-8")) if isinstance(k, str) else int(k) for k in keys)
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(ss))


SeedLike = int | np.random.Generator


def as_generator(seed: SeedLike, *keys: int | str) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_stream(seed, *keys)


def git_blob_hash(data: bytes) -> str:
    """Same digest `git hash-object` prints for a file with these bytes."""
    header = f"blob {len(data)}\0".encode("utf-8")
    return hashlib.sha1(header + data).hexdigest()


def file_blob_hash(path: str | os.PathLike) -> str:
    return git_blob_hash(pathlib.Path(path).read_bytes())


class ManifestInput(BaseModel):
    path: str
    sha1: str


class RunManifest(BaseModel):
    command: str = Field(description="subcommand name")
    argv: list[str] = Field(description="exact argument vector, replayable", default_factory=list)
    config: dict[str, Any] = Field(description="fully resolved configuration", default_factory=dict)
    seeds: list[int] = Field(default_factory=list)
    inputs: list[ManifestInput] = Field(default_factory=list)
    outputs: list[str] = Field(default_factory=list)
    input_hash: str = Field(description="hash over all input blob hashes", default="")
    tool_version: str = __version__
    started_at: str = ""
    wall_clock_seconds: float = 0.0


class ManifestRecorder:
    """Collects run facts while a command executes and writes one manifest at the end."""

    def __init__(self, command: str, argv: list[str], seeds: Iterable[int] = ()) -> None:
        self.manifest = RunManifest(
            command=command,
            argv=list(argv),
            seeds=list(seeds),
            started_at=datetime.now(timezone.utc).isoformat(),
        )
        self._t0 = time.perf_counter()

    def add_input(self, path: str | os.PathLike) -> None:
        self.manifest.inputs.append(ManifestInput(path=str(path), sha1=file_blob_hash(path)))

    def add_output(self, path: str | os.PathLike) -> None:
        self.manifest.outputs.append(str(path))

    def set_config(self, config: dict[str, Any]) -> None:
        self.manifest.config = config

    def write(self, primary_output: str | os.PathLike) -> pathlib.Path:
        m = self.manifest
        m.input_hash = git_blob_hash("".join(i.sha1 for i in m.inputs).encode("utf-8"))
        m.wall_clock_seconds = round(time.perf_counter() - self._t0, 3)
        path = pathlib.Path(f"{primary_output}.manifest.json")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(m.model_dump(mode="json"), indent=2, ensure_ascii=False, default=str) + "\n", encoding="utf-8")
        log.info("manifest written", extra={"path": str(path), "command": m.command})
        return path


def read_manifest(path: str | os.PathLike) -> RunManifest:
    return RunManifest.model_validate_json(pathlib.Path(path).read_text(encoding="utf-8"))
