import numpy as np
import pytest

from nvregsim.core.errors import ChargeStatsError
from nvregsim.simulation.charge_stats import (
    CHARGE_READ_WINDOW_MS,
    PhotonHistogram,
    ThresholdModel,
    asymmetry_sweep,
    fit_poisson_mixture,
    independent_asymmetry,
    synthetic_histogram,
    synthetic_joint_shots,
    threshold_tradeoff,
)

WEIGHTS = (0.09, 0.42, 0.49)
LAMBDAS = (1.5, 5.0, 11.0)


@pytest.fixture(scope="module")
def charge_histogram():
    return synthetic_histogram(WEIGHTS, LAMBDAS, 60_000, rng=11)


def test_histogram_from_rows_fills_gaps():
    hist = PhotonHistogram.from_rows([(0, 3), (2, 5), (2, 1)])
    assert hist.counts.tolist() == [3, 0, 6]
    assert hist.total_shots == 9
    assert hist.percentile(50) == 2
    assert hist.truncated(1).counts.tolist() == [3, 0]


@pytest.mark.parametrize("rows", [[], [(-1, 4)]])
def test_histogram_rejects_bad_rows(rows):
    with pytest.raises(ChargeStatsError):
        PhotonHistogram.from_rows(rows)


@pytest.mark.parametrize("counts", [[], [1, -2], [1.5, 2]])
def test_histogram_validation(counts):
    with pytest.raises(ChargeStatsError):
        PhotonHistogram(np.array(counts))


def test_single_component_fit(rng):
    hist = PhotonHistogram.from_photon_numbers(rng.poisson(4.0, size=20_000))
    fit = fit_poisson_mixture(hist, n_components=1)
    assert fit.lambdas[0] == pytest.approx(4.0, rel=0.02)
    assert fit.weights[0] == pytest.approx(1.0)
    assert fit.labels == ("c0",)


def test_ml_fit_recovers_mixture(charge_histogram):
    fit = fit_poisson_mixture(charge_histogram, method="ml")
    assert fit.labels == ("00", "-0", "--")
    assert np.allclose(fit.lambdas, LAMBDAS, rtol=0.1)
    assert np.allclose(fit.weights, WEIGHTS, atol=0.05)
    assert fit.weights.sum() == pytest.approx(1.0)
    assert not fit.collapsed
    assert np.all(np.diff(fit.lambdas) > 0)
    assert fit.to_dict()["components"][2]["label"] == "--"


def test_ls_fit_recovers_mixture(charge_histogram):
    fit = fit_poisson_mixture(charge_histogram, method="ls")
    assert fit.method == "ls"
    assert fit.weight("--") == pytest.approx(0.49, abs=0.08)
    assert fit.lambdas[-1] == pytest.approx(11.0, rel=0.1)


def test_fixed_rates_fit_weights_only(charge_histogram):
    fit = fit_poisson_mixture(charge_histogram, fixed_lambdas=LAMBDAS)
    assert np.allclose(fit.lambdas, LAMBDAS)
    assert np.allclose(fit.weights, WEIGHTS, atol=0.03)


@pytest.mark.parametrize(
    "kwargs",
    [{"n_components": 0}, {"method": "em"}, {"fixed_lambdas": (1.0, 2.0)}, {"fixed_lambdas": (0.0, 2.0, 3.0)}],
)
def test_mixture_fit_argument_errors(charge_histogram, kwargs):
    with pytest.raises(ChargeStatsError):
        fit_poisson_mixture(charge_histogram, **kwargs)


def test_mixture_pmf_normalized(charge_histogram):
    fit = fit_poisson_mixture(charge_histogram, fixed_lambdas=LAMBDAS)
    assert fit.pmf(np.arange(80)).sum() == pytest.approx(1.0, abs=1e-9)


def test_threshold_model_values():
    model = ThresholdModel(WEIGHTS, LAMBDAS)
    assert model.fidelity(9) == pytest.approx(0.929, abs=2e-3)
    assert model.noise_ratio(9) == pytest.approx(1.335, abs=2e-3)
    assert model.fidelity(0) == pytest.approx(0.49)
    assert model.noise_ratio(0) == pytest.approx(1.0)
    assert model.kept_fraction(0) == pytest.approx(1.0)


def test_threshold_tradeoff_is_monotonic():
    points = threshold_tradeoff(ThresholdModel(WEIGHTS, LAMBDAS), range(0, 16))
    fidelity = [p.fidelity for p in points]
    noise = [p.noise_ratio for p in points]
    assert all(np.diff(fidelity) > 0)
    assert all(np.diff(noise) > 0)
    assert points[9].to_dict()["n_thresh"] == 9


def test_threshold_beyond_all_shots_raises():
    with pytest.raises(ChargeStatsError):
        ThresholdModel((0.0,), (5.0,)).fidelity(1)


@pytest.mark.slow
def test_joint_shots_match_threshold_model():
    shots = synthetic_joint_shots(WEIGHTS, LAMBDAS, 40_000, rng=5)
    scale = CHARGE_READ_WINDOW_MS / 3.5
    points = threshold_tradeoff(shots, [0, 9], lambdas_read=[scale * lam for lam in LAMBDAS])
    model = ThresholdModel(WEIGHTS, LAMBDAS)
    assert points[0].fidelity == pytest.approx(0.49, abs=0.03)
    assert points[1].fidelity == pytest.approx(model.fidelity(9), abs=0.03)
    assert points[1].noise_ratio == pytest.approx(model.noise_ratio(9), abs=0.03)


def test_joint_shots_validation():
    shots = synthetic_joint_shots(WEIGHTS, LAMBDAS, 100, rng=1)
    with pytest.raises(ChargeStatsError):
        shots.read_histogram(np.zeros(100, dtype=bool))
    with pytest.raises(ChargeStatsError):
        threshold_tradeoff(shots, [500], lambdas_read=LAMBDAS)


def test_independent_asymmetry():
    assert independent_asymmetry(1.0) == 0.0
    assert independent_asymmetry(0.8) == pytest.approx(0.25)
    for bad in (0.0, -0.1, 1.2):
        with pytest.raises(ChargeStatsError):
            independent_asymmetry(bad)


def test_asymmetry_sweep_follows_independent_statistics(reduced_model, ideal_style, rwa_options):
    tau2 = np.linspace(0.0, 380.0, 39)
    sweep = asymmetry_sweep(reduced_model, [0.6, 0.9], 800.0, tau2, style=ideal_style, options=rwa_options)
    for p, value in sweep.items():
        assert value == pytest.approx(independent_asymmetry(p), abs=0.05)
