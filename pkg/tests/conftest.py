"""Shared fixtures: parameter presets, register models and an isolated ledger/output area."""
import json
from pathlib import Path

import numpy as np
import pytest

from nvregsim.core.database import configure_database, init_db
from nvregsim.schemas.experiment_schema import load_experiment_config
from nvregsim.simulation.hamiltonian import ReducedPairModel
from nvregsim.simulation.propagation import PropagationOptions
from nvregsim.simulation.sequences import PulseStyle

ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = ROOT / "configs"

SETTING2_NU_DIP = 0.11289


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def setting2_path() -> Path:
    return CONFIG_DIR / "setting2.json"


@pytest.fixture(scope="session")
def setting2_config(setting2_path):
    return load_experiment_config(setting2_path)


@pytest.fixture(scope="session")
def setting2_model(setting2_config):
    """Full 81-level register at the setting-2 field."""
    return setting2_config.model.build()


@pytest.fixture
def reduced_model():
    return ReducedPairModel(SETTING2_NU_DIP, contrasts=(0.107, 0.194))


@pytest.fixture
def ideal_style():
    return PulseStyle(rabi=23.7, envelope="instantaneous")


@pytest.fixture
def rwa_options():
    return PropagationOptions(step_density=5.0, frame="rwa")


@pytest.fixture
def ledger():
    """In-memory run ledger, reset after the test."""
    configure_database("sqlite://")
    init_db()
    yield
    configure_database(None)


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict to a temporary JSON file and return its path."""

    def _write(payload: dict, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def reduced_payload(setting2_path) -> dict:
    """setting-2 preset switched to the reduced model with ideal pulses."""
    payload = json.loads(setting2_path.read_text(encoding="utf-8"))
    payload["model"]["kind"] = "reduced"
    for nv in ("nv1", "nv2"):
        payload["model"][nv].pop("carrier_mhz", None)
    payload["pulses"]["envelope"] = "instantaneous"
    return payload
