import json
import os
from pathlib import Path
from typing import Iterable, Iterator, Optional

from pydantic import ConfigDict, ValidationError

from tabreg.logger import get_logger
from tabreg.synth.grid import LdpPairLabel, WordBox
from tabreg.table.model import Table

log = get_logger(__name__)


class DatasetFormatError(ValueError):
    def __init__(self, path: str | os.PathLike, line_no: int, message: str) -> None:
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no
        self.message = message


class DatasetRecord(Table):
    """테이블 스키마 + 선택적인 단어 박스 / LDP 라벨. 알 수 없는 필드는 무시한다."""

    model_config = ConfigDict(extra="ignore")

    table_id: str
    words: Optional[list[WordBox]] = None
    ldp_labels: Optional[list[LdpPairLabel]] = None

    def as_table(self) -> Table:
        return Table(cells=self.cells, n_rows=self.n_rows, n_cols=self.n_cols, image_size=self.image_size)


class DatasetStore:
    """NDJSON 파일 기반 데이터셋 저장소 (한 줄 = 한 레코드)"""

    def __init__(self, path: str | os.PathLike) -> None:
        self.path = Path(path)

    def write(self, records: Iterable[DatasetRecord]) -> int:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        n = 0
        with self.path.open("w", encoding="utf-8", newline="\n") as f:
            for rec in records:
                f.write(json.dumps(rec.to_json_dict(), ensure_ascii=False, sort_keys=True, separators=(",", ":")))
                f.write("\n")
                n += 1
        log.info("dataset written", extra={"path": str(self.path), "records": n})
        return n

    def iter_records(self) -> Iterator[DatasetRecord]:
        if not self.path.exists():
            raise DatasetFormatError(self.path, 0, "file not found")
        with self.path.open("r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    payload = json.loads(line)
                except json.JSONDecodeError as e:
                    raise DatasetFormatError(self.path, line_no, f"invalid JSON: {e.msg}") from e
                if not isinstance(payload, dict):
                    raise DatasetFormatError(self.path, line_no, "record is not a JSON object")
                try:
                    yield DatasetRecord.model_validate(payload)
                except ValidationError as e:
                    first = e.errors()[0]
                    where = ".".join(str(p) for p in first["loc"])
                    raise DatasetFormatError(self.path, line_no, f"{where}: {first['msg']}") from e

    def read(self) -> list[DatasetRecord]:
        return list(self.iter_records())


def write_dataset(path: str | os.PathLike, records: Iterable[DatasetRecord]) -> int:
    return DatasetStore(path).write(records)


def read_dataset(path: str | os.PathLike) -> list[DatasetRecord]:
    return DatasetStore(path).read()


def record_from_table(table: Table, table_id: str, **extra) -> DatasetRecord:
    return DatasetRecord(
        table_id=table_id,
        cells=table.cells,
        n_rows=table.n_rows,
        n_cols=table.n_cols,
        image_size=table.image_size,
        **extra,
    )


__all__ = [
    "DatasetFormatError",
    "DatasetRecord",
    "DatasetStore",
    "read_dataset",
    "record_from_table",
    "write_dataset",
]
