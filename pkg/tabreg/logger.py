import json
import logging
import os
import sys
from datetime import datetime, timezone
from typing import Any, Dict, Optional

# LogRecord attributes that are never treated as structured extras
_RESERVED = frozenset({
    "name", "msg", "args", "levelname", "levelno", "pathname", "filename",
    "module", "exc_info", "exc_text", "stack_info", "lineno", "funcName",
    "created", "msecs", "relativeCreated", "thread", "threadName", "processName",
    "process", "asctime", "taskName", "message",
})


def _extras(record: logging.LogRecord) -> Dict[str, Any]:
    return {
        key: value
        for key, value in record.__dict__.items()
        if key not in _RESERVED and not key.startswith("_")
    }


class JsonFormatter(logging.Formatter):
    """One JSON object per line; `extra={...}` fields are merged at top level."""

    def format(self, record: logging.LogRecord) -> str:
        base: Dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "funcName": record.funcName,
            "lineno": record.lineno,
        }

        for key, value in _extras(record).items():
            if key in base:
                continue
            try:
                json.dumps(value, ensure_ascii=False, default=str)
                base[key] = value
            except Exception:
                base[key] = str(value)

        if record.exc_info:
            base["exc_info"] = self.formatException(record.exc_info)

        return json.dumps(base, ensure_ascii=False, default=str)


class ConsoleFormatter(logging.Formatter):
    """Console formatter that appends extra fields as key=value pairs.

    Safe for records without those extras (no KeyError).
    """

    def format(self, record: logging.LogRecord) -> str:
        base = super().format(record)
        extras = _extras(record)
        if not extras:
            return base
        parts = []
        for k in sorted(extras):
            v = extras[k]
            try:
                if isinstance(v, float):
                    val = f"{v:.6g}"
                elif isinstance(v, (str, int, bool)) or v is None:
                    val = v
                else:
                    val = json.dumps(v, ensure_ascii=False, default=str)
            except Exception:
                val = str(v)
            parts.append(f"{k}={val}")
        return f"{base} | " + ", ".join(parts)


def setup_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> logging.Logger:
    """Configure the root logger.

    Arguments win over the environment:
      - LOG_LEVEL: default INFO
      - LOG_FORMAT: "json" or "console" (default console)

    Everything goes to stderr so that stdout stays reserved for command output.
    """
    level = (level or os.getenv("LOG_LEVEL", "INFO")).upper()
    fmt = (fmt or os.getenv("LOG_FORMAT", "console")).lower()

    handler = logging.StreamHandler(stream=sys.stderr)

    if fmt == "json":
        handler.setFormatter(JsonFormatter())
    else:
        handler.setFormatter(ConsoleFormatter(
            fmt="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        ))

    logging.basicConfig(level=level, handlers=[handler], force=True)

    # third-party chatter stays at WARNING unless we are debugging
    for name in ("nltk", "shapely"):
        logging.getLogger(name).setLevel(level if level == "DEBUG" else "WARNING")

    return logging.getLogger()


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
