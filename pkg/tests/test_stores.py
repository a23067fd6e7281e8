import json

import numpy as np
import pytest

from tabreg.stores.checkpoint_store import Checkpoint, CheckpointError, CheckpointStore, load_checkpoint, save_checkpoint
from tabreg.stores.dataset_store import DatasetFormatError, DatasetStore, read_dataset, write_dataset
from tabreg.stores.history_store import HistoryStore
from tabreg.synth.config import GenConfig
from tabreg.synth.generator import generate_records


@pytest.fixture
def records():
    return generate_records(GenConfig(rows_range=(1, 6), cols_range=(1, 6), span_prob=0.2, jitter_sigma=1.5, seed=77), 100)


class TestDatasetStore:
    def test_round_trip(self, tmp_path, records):
        path = tmp_path / "data.ndjson"
        assert write_dataset(path, records) == 100
        assert read_dataset(path) == records

    def test_byte_stable(self, tmp_path, records):
        a, b = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
        write_dataset(a, records)
        write_dataset(b, read_dataset(a))
        assert a.read_bytes() == b.read_bytes()

    def test_truncated_line(self, tmp_path, records):
        path = tmp_path / "data.ndjson"
        write_dataset(path, records[:3])
        lines = path.read_text(encoding="utf-8").splitlines()
        lines[1] = lines[1][: len(lines[1]) // 2]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        with pytest.raises(DatasetFormatError) as exc:
            read_dataset(path)
        assert exc.value.line_no == 2

    def test_schema_error_names_line(self, tmp_path, records):
        path = tmp_path / "data.ndjson"
        payload = records[0].to_json_dict()
        payload["n_rows"] = 0
        path.write_text(json.dumps(payload) + "\n", encoding="utf-8")
        with pytest.raises(DatasetFormatError) as exc:
            read_dataset(path)
        assert exc.value.line_no == 1
        assert "n_rows" in exc.value.message

    def test_unknown_fields_ignored(self, tmp_path, records):
        path = tmp_path / "data.ndjson"
        payload = records[0].to_json_dict()
        payload["source"] = "scanner-7"
        path.write_text(json.dumps(payload) + "\n\n", encoding="utf-8")
        assert read_dataset(path) == [records[0]]

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetFormatError):
            DatasetStore(tmp_path / "nope.ndjson").read()

    def test_as_table_drops_extras(self, records):
        t = records[0].as_table()
        assert not hasattr(t, "table_id")
        assert t.cells == records[0].cells


class TestCheckpointStore:
    def test_round_trip_is_exact(self, tmp_path, rng):
        params = {"w": rng.normal(size=(3, 4)), "b": rng.normal(size=4), "s": np.array(0.1 + 0.2)}
        path = save_checkpoint(tmp_path / "m.json", Checkpoint(component="regressor", config={"d": 8}, parameters=params))
        loaded = load_checkpoint(path, component="regressor")
        assert loaded.config == {"d": 8}
        assert set(loaded.parameters) == set(params)
        for name, arr in params.items():
            assert loaded.parameters[name].shape == arr.shape
            assert np.array_equal(loaded.parameters[name], arr)

    def test_component_mismatch(self, tmp_path):
        path = save_checkpoint(tmp_path / "m.json", Checkpoint(component="ldp", parameters={"x": np.zeros(2)}))
        with pytest.raises(CheckpointError) as exc:
            load_checkpoint(path, component="regressor")
        assert exc.value.field == "component"

    def test_missing(self, tmp_path):
        with pytest.raises(CheckpointError) as exc:
            CheckpointStore(tmp_path / "none.json").load()
        assert exc.value.field == "path"

    def test_value_count_mismatch(self, tmp_path):
        path = save_checkpoint(tmp_path / "m.json", Checkpoint(component="ldp", parameters={"x": np.zeros((2, 2))}))
        raw = json.loads(path.read_text())
        raw["parameters"]["x"]["values"].pop()
        path.write_text(json.dumps(raw))
        with pytest.raises(CheckpointError) as exc:
            load_checkpoint(path)
        assert exc.value.field == "parameters.x"

    def test_wrong_version(self, tmp_path):
        path = save_checkpoint(tmp_path / "m.json", Checkpoint(component="ldp"))
        raw = json.loads(path.read_text())
        raw["format_version"] = 99
        path.write_text(json.dumps(raw))
        with pytest.raises(CheckpointError) as exc:
            load_checkpoint(path)
        assert exc.value.field == "format_version"

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{not json")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)


def test_history_round_trip(tmp_path):
    rows = [{"epoch": 0, "loss": 1.5}, {"epoch": 1, "loss": 0.75, "heldout_accuracy": None}]
    store = HistoryStore(tmp_path / "h.ndjson")
    store.write(rows)
    assert store.read() == rows
    assert HistoryStore(tmp_path / "none.ndjson").read() == []
