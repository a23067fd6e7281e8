import json
import os
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from tabreg.logger import get_logger

log = get_logger(__name__)

FORMAT_VERSION = 1


class CheckpointError(RuntimeError):
    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"checkpoint {field}: {message}")
        self.field = field
        self.message = message


class _StoredArray(BaseModel):
    shape: list[int]
    values: list[float]


class _CheckpointFile(BaseModel):
    format_version: int
    component: str
    config: dict[str, Any] = Field(default_factory=dict)
    parameters: dict[str, _StoredArray]


class Checkpoint(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    component: str = Field(description="'regressor' or 'ldp'")
    config: dict[str, Any] = Field(default_factory=dict)
    parameters: dict[str, np.ndarray] = Field(default_factory=dict)


class CheckpointStore:
    """JSON 체크포인트 저장소. float64 값은 repr 그대로 저장되어 정확히 복원된다."""

    def __init__(self, path: str | os.PathLike) -> None:
        self.path = Path(path)

    def save(self, ckpt: Checkpoint) -> Path:
        payload = {
            "format_version": FORMAT_VERSION,
            "component": ckpt.component,
            "config": ckpt.config,
            "parameters": {
                name: {"shape": list(arr.shape), "values": np.asarray(arr, dtype=np.float64).ravel().tolist()}
                for name, arr in sorted(ckpt.parameters.items())
            },
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8")
        log.info("checkpoint saved", extra={"path": str(self.path), "component": ckpt.component, "tensors": len(payload["parameters"])})
        return self.path

    def load(self, component: str | None = None) -> Checkpoint:
        if not self.path.exists():
            raise CheckpointError("path", f"{self.path} does not exist")
        try:
            raw = _CheckpointFile.model_validate_json(self.path.read_text(encoding="utf-8"))
        except ValidationError as e:
            first = e.errors()[0]
            raise CheckpointError(".".join(str(p) for p in first["loc"]) or "file", first["msg"]) from e
        if raw.format_version != FORMAT_VERSION:
            raise CheckpointError("format_version", f"expected {FORMAT_VERSION}, got {raw.format_version}")
        if component is not None and raw.component != component:
            raise CheckpointError("component", f"expected {component!r}, got {raw.component!r}")

        params: dict[str, np.ndarray] = {}
        for name, stored in raw.parameters.items():
            expected = int(np.prod(stored.shape)) if stored.shape else 1
            if len(stored.values) != expected:
                raise CheckpointError(f"parameters.{name}", f"{len(stored.values)} values for shape {stored.shape}")
            params[name] = np.asarray(stored.values, dtype=np.float64).reshape(stored.shape)
        return Checkpoint(component=raw.component, config=raw.config, parameters=params)


def save_checkpoint(path: str | os.PathLike, ckpt: Checkpoint) -> Path:
    return CheckpointStore(path).save(ckpt)


def load_checkpoint(path: str | os.PathLike, component: str | None = None) -> Checkpoint:
    return CheckpointStore(path).load(component)
