import json
import logging

import numpy as np

from tabreg.logger import ConsoleFormatter, JsonFormatter
from tabreg.utils import ManifestRecorder, Settings, as_generator, git_blob_hash, read_manifest, rng_stream


def _record(**extra) -> logging.LogRecord:
    record = logging.LogRecord("tabreg.test", logging.INFO, __file__, 1, "epoch finished", None, None)
    for k, v in extra.items():
        setattr(record, k, v)
    return record


def test_rng_streams_are_addressed():
    a = rng_stream(7, "table", 3).random(4)
    assert np.array_equal(a, rng_stream(7, "table", 3).random(4))
    assert not np.array_equal(a, rng_stream(7, "table", 4).random(4))
    assert not np.array_equal(a, rng_stream(8, "table", 3).random(4))
    assert not np.array_equal(a, rng_stream(7, "words", 3).random(4))


def test_as_generator_passes_generators_through():
    g = np.random.default_rng(0)
    assert as_generator(g) is g
    assert np.array_equal(as_generator(5, "x").random(2), rng_stream(5, "x").random(2))


def test_git_blob_hash():
    assert git_blob_hash(b"hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"
    assert git_blob_hash(b"") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391"


def test_settings(monkeypatch, tmp_path):
    monkeypatch.setenv("TABREG_OUTPUT_DIR", str(tmp_path))
    monkeypatch.setenv("LOG_FORMAT", "json")
    s = Settings.from_env()
    assert s.log_format == "json"
    assert s.resolve_output("a/b.json") == tmp_path / "a" / "b.json"
    assert s.resolve_output(tmp_path / "c.json") == tmp_path / "c.json"


def test_manifest(tmp_path):
    src = tmp_path / "in.txt"
    src.write_bytes(b"hello\n")
    rec = ManifestRecorder("eval", ["eval", "--gt", str(src)], seeds=[1])
    rec.add_input(src)
    rec.set_config({"iou_threshold": 0.5})
    out = tmp_path / "report.json"
    rec.add_output(out)
    path = rec.write(out)
    assert path.name == "report.json.manifest.json"
    m = read_manifest(path)
    assert m.inputs[0].sha1 == "ce013625030ba8dba906f756967f9e9ca394464a"
    assert m.argv == ["eval", "--gt", str(src)]
    assert m.input_hash == git_blob_hash(m.inputs[0].sha1.encode())


def test_json_formatter_merges_extras():
    line = JsonFormatter().format(_record(epoch=3, loss=0.25))
    payload = json.loads(line)
    assert payload["message"] == "epoch finished"
    assert payload["epoch"] == 3
    assert payload["loss"] == 0.25


def test_console_formatter_appends_extras():
    fmt = ConsoleFormatter(fmt="%(levelname)s %(message)s")
    assert fmt.format(_record(loss=0.25, tag="a")) == "INFO epoch finished | loss=0.25, tag=a"
    assert fmt.format(_record()) == "INFO epoch finished"
