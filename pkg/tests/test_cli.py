import json

import pytest

from nvregsim.core.app import create_app
from nvregsim.core.database import configure_database, get_db
from nvregsim.models.run_record import RunRecord


@pytest.fixture
def app(tmp_path, monkeypatch):
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.chdir(tmp_path)
    yield create_app("testing")
    configure_database(None)


def _ledger_rows():
    db = next(get_db())
    try:
        return [r.to_dict() for r in db.query(RunRecord).order_by(RunRecord.id)]
    finally:
        db.close()


def test_geometry_solve_writes_summary(app, tmp_path, capsys):
    code = app.run(["geometry", "solve", "--nu1", "2571.0", "--nu2", "3160.2", "--d", "2865.42", "--theta-b", "3.58"])
    assert code == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["success"] is True

    summary = json.loads((tmp_path / "results" / "geometry_solve_summary.json").read_text())
    assert summary["results"]["b_gauss"] == pytest.approx(105.33, abs=0.02)
    assert "phi_deg" in summary["results"]
    assert summary["provenance"]["config_hash"] == printed["config_hash"]

    [row] = _ledger_rows()
    assert row["status"] == "succeeded"
    assert row["config_hash"] == printed["config_hash"]


def test_unphysical_lines_exit_with_numerical_code(app, capsys):
    assert app.run(["geometry", "solve", "--nu1", "2800.0", "--nu2", "2900.0", "--d", "2870.0"]) == 3
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"]["code"] == "UNPHYSICAL_TRANSITIONS"


def test_invalid_arguments_exit_2(app, capsys):
    assert app.run(["geometry", "solve", "--nu1", "-5", "--nu2", "3160.2"]) == 2
    assert app.run(["geometry", "distance"]) == 2


def test_missing_config_exit_2(app, tmp_path):
    assert app.run(["bench", "rb", "--config", str(tmp_path / "missing.json")]) == 2
    [row] = _ledger_rows()
    assert row["status"] == "failed"
    assert row["error_code"] == "SCHEMA_VIOLATION"


def test_bench_rb_is_reproducible(app, reduced_payload, write_config, tmp_path):
    reduced_payload["experiment"] = {
        "kind": "rb", "lengths": [1, 2, 3, 4, 6], "n_random": 3, "backend": "ideal",
        "depolarizing": 0.02, "single_qubit": "skip",
    }
    path = write_config(reduced_payload)
    runs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert app.run(["bench", "rb", "--config", str(path), "--seed", "5", "--output-dir", str(out)]) == 0
        runs.append(json.loads((out / "bench_rb_summary.json").read_text()))
    assert runs[0] == runs[1]
    assert runs[0]["provenance"]["seed"] == 5
    assert runs[0]["results"]["epc"] == pytest.approx(0.015, rel=1e-3)
    assert (tmp_path / "a" / "bench_rb_survival.csv").exists()


def test_charge_fit_from_histogram_csv(app, tmp_path):
    from nvregsim.simulation.charge_stats import synthetic_histogram

    hist = synthetic_histogram((0.09, 0.42, 0.49), (1.5, 5.0, 11.0), 30_000, rng=2)
    csv_path = tmp_path / "hist.csv"
    csv_path.write_text("n_photons,count\n" + "".join(f"{n},{c}\n" for n, c in enumerate(hist.counts)))
    assert app.run(["charge", "fit", "--histogram", str(csv_path), "--max-threshold", "10"]) == 0

    summary = json.loads((tmp_path / "results" / "charge_fit_summary.json").read_text())
    assert summary["results"]["threshold_source"] == "fitted mixture"
    weights = [c["weight"] for c in summary["results"]["fit"]["components"]]
    assert weights[-1] == pytest.approx(0.49, abs=0.05)
    lines = (tmp_path / "results" / "charge_fit_thresholds.csv").read_text().splitlines()
    assert lines[1] == "n_thresh,fidelity,noise_ratio,kept_fraction"
    assert len(lines) == 2 + 11


def test_photophysics_rates_single_column(app, tmp_path):
    args = ["photophysics", "rates", "--rate-column", "adapted", "--b-points", "3", "--output-dir", str(tmp_path / "pp")]
    assert app.run(args) == 0
    summary = json.loads((tmp_path / "pp" / "photophysics_rates_summary.json").read_text())
    spam = summary["results"]["columns"]["adapted"]["spam"]
    assert spam["f_init_field"] < spam["f_init_zero"]
    assert "mean_spam" not in summary["results"]
