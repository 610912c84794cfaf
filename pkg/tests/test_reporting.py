import json

import numpy as np
import pytest

from nvregsim.core.errors import ConfigValidationError, ReportError
from nvregsim.schemas.report_schema import Provenance, RunSummary, TableSpec
from nvregsim.utils.reporting import canonical_json, config_hash, emit_report, read_csv_rows, to_plain


def _summary(**results):
    return RunSummary(command="geometry solve", provenance=Provenance(config_hash="0" * 64, tool_version="test"), results=results)


def test_to_plain_handles_numpy_and_non_finite():
    plain = to_plain({"a": np.float64(1.5), "b": np.array([1, 2]), "c": float("nan"), 3: np.bool_(True), "z": 1 + 2j})
    assert plain == {"a": 1.5, "b": [1, 2], "c": None, "3": True, "z": {"re": 1.0, "im": 2.0}}


def test_canonical_json_sorts_keys():
    assert canonical_json({"b": 1, "a": float("inf")}) == '{"a":null,"b":1}'


def test_config_hash_ignores_key_order():
    assert config_hash({"x": 1, "y": [1.0, 2.0]}) == config_hash({"y": [1.0, 2.0], "x": 1})
    assert config_hash({"x": 1}) != config_hash({"x": 2})
    assert len(config_hash({})) == 64


def test_emit_report_writes_tables_and_summary(tmp_path):
    table = TableSpec(name="decay", description="signal per length", columns=["n", "signal"], rows=[[0, 1.0], [1, None]])
    written = emit_report(tmp_path / "out", "bench_rb", _summary(epc=float("nan")), [table])
    names = [p.name for p in written]
    assert names == ["bench_rb_decay.csv", "bench_rb_summary.json"]

    lines = (tmp_path / "out" / "bench_rb_decay.csv").read_text().splitlines()
    assert lines[0] == "# signal per length | columns: n, signal"
    assert lines[1:] == ["n,signal", "0,1.0", "1,"]

    summary = json.loads((tmp_path / "out" / "bench_rb_summary.json").read_text())
    assert summary["results"]["epc"] is None
    assert summary["artifacts"] == ["bench_rb_decay.csv"]
    assert summary["provenance"]["schema_version"] == "1.0"


def test_emit_report_formats(tmp_path):
    table = TableSpec(name="t", description="d", columns=["x"])
    assert [p.name for p in emit_report(tmp_path, "s", _summary(), [table], fmt="json")] == ["s_summary.json"]
    assert [p.name for p in emit_report(tmp_path, "s", _summary(), [table], fmt="csv")] == ["s_t.csv"]
    with pytest.raises(ReportError):
        emit_report(tmp_path, "s", _summary(), fmt="xml")


def test_emit_report_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ReportError) as info:
        emit_report(blocker / "sub", "s", _summary())
    assert info.value.code == "UNWRITABLE_PATH"


def test_read_csv_rows(tmp_path):
    path = tmp_path / "hist.csv"
    path.write_text("# photon histogram\nn_photons,count\n0,12\n1,30\n")
    assert read_csv_rows(path, ["n_photons", "count"]) == [[0.0, 12.0], [1.0, 30.0]]
    with pytest.raises(ConfigValidationError):
        read_csv_rows(path, ["shots"])
    path.write_text("n_photons,count\n0,many\n")
    with pytest.raises(ConfigValidationError):
        read_csv_rows(path, ["n_photons", "count"])
    with pytest.raises(ConfigValidationError):
        read_csv_rows(tmp_path / "missing.csv", ["n_photons"])
