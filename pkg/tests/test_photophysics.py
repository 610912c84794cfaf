import numpy as np
import pytest

from nvregsim.core.errors import PhotophysicsError
from nvregsim.simulation.photophysics import (
    N_LEVELS,
    RateColumn,
    build_rate_model,
    init_and_spam,
    init_fidelity,
    mean_spam,
    pump_cycle,
    rate_column,
    readout_contrast,
    relative_contrast,
    spin_mixing,
    steady_state,
    thermal_ground,
)

B_FIELD = 105.33
THETA = 74.08


@pytest.fixture(params=["gupta", "adapted"])
def column(request):
    return rate_column(request.param)


def test_unknown_rate_column():
    with pytest.raises(PhotophysicsError):
        rate_column("literature")


def test_negative_rate_rejected():
    with pytest.raises(PhotophysicsError):
        RateColumn("bad", 66.0, -1.0, 90.0, 4.9, 2.0, 1.0)


def test_spin_mixing_limits():
    assert np.array_equal(spin_mixing(0.0, THETA, 2870.0), np.eye(3))
    assert np.allclose(spin_mixing(100.0, 0.0, 2870.0), np.eye(3), atol=1e-12)
    with pytest.raises(PhotophysicsError):
        spin_mixing(-1.0, THETA, 2870.0)


def test_spin_mixing_is_doubly_stochastic():
    m = spin_mixing(B_FIELD, THETA, 2870.0)
    assert np.allclose(m.sum(axis=0), 1.0)
    assert np.allclose(m.sum(axis=1), 1.0)
    assert m[0, 0] < 1.0


def test_zero_field_model_keeps_rates(column):
    model = build_rate_model(column, 0.0, THETA)
    assert np.allclose(model.rates, column.zero_field_rates())


def test_generator_conserves_population(column):
    model = build_rate_model(column, B_FIELD, THETA)
    for laser in (True, False):
        assert np.allclose(model.generator(laser).sum(axis=0), 0.0, atol=1e-9)
    p = pump_cycle(model, 500.0, 200.0)
    assert p.sum() == pytest.approx(1.0)
    assert np.all(p >= 0)


def test_steady_state_is_stationary(column):
    model = build_rate_model(column, B_FIELD, THETA)
    p = steady_state(model)
    assert np.allclose(model.generator(True) @ p, 0.0, atol=1e-8)
    assert init_fidelity(pump_cycle(model, 20_000.0, 0.0)) == pytest.approx(init_fidelity(p), abs=1e-6)


def test_pump_cycle_validation(column):
    model = build_rate_model(column, 0.0, 0.0)
    with pytest.raises(PhotophysicsError):
        pump_cycle(model, -1.0)
    with pytest.raises(PhotophysicsError):
        pump_cycle(model, initial=np.ones(3) / 3)


def test_thermal_ground():
    p = thermal_ground()
    assert p.shape == (N_LEVELS,)
    assert init_fidelity(p) == pytest.approx(1 / 3)


def test_misaligned_field_degrades_initialization(column):
    estimate = init_and_spam(build_rate_model(column, B_FIELD, THETA), build_rate_model(column, 0.0, THETA))
    assert estimate.f_init_field < estimate.f_init_zero
    assert 0.0 < estimate.err_spam < 0.5
    assert estimate.infidelity_ratio > 1.0
    assert set(estimate.to_dict()) == {"f_init_field", "f_init_zero", "err_spam", "infidelity_ratio"}


def test_identical_fields_give_no_spam_error(column):
    model = build_rate_model(column, B_FIELD, THETA)
    estimate = init_and_spam(model, model)
    assert estimate.err_spam == pytest.approx(0.0)
    assert estimate.infidelity_ratio == pytest.approx(1.0)


def test_setting2_spam_error_from_both_columns():
    estimate = mean_spam(B_FIELD, THETA, d=2865.42)
    assert estimate.f_init_zero == pytest.approx(0.77, abs=0.03)
    assert estimate.err_spam == pytest.approx(0.17, abs=0.04)


def test_spam_requires_matching_columns():
    with pytest.raises(PhotophysicsError):
        init_and_spam(
            build_rate_model(rate_column("gupta"), B_FIELD, THETA),
            build_rate_model(rate_column("adapted"), 0.0, THETA),
        )


def test_mean_spam_averages_columns():
    both = mean_spam(B_FIELD, THETA)
    single = [mean_spam(B_FIELD, THETA, columns=(name,)) for name in ("gupta", "adapted")]
    assert both.f_init_field == pytest.approx(np.mean([s.f_init_field for s in single]))
    assert both.f_init_zero == pytest.approx(np.mean([s.f_init_zero for s in single]))


def test_readout_contrast_is_positive_at_zero_field(column):
    assert 0.0 < readout_contrast(build_rate_model(column, 0.0, 0.0)) < 1.0


def test_contrast_falls_with_misaligned_field(column):
    points = relative_contrast(column, [0.0, 40.0, 150.0], THETA)
    ratios = [p.ratio for p in points]
    assert ratios[0] == pytest.approx(1.0)
    assert ratios[0] > ratios[1] > ratios[2]
    assert points[-1].to_dict()["b_gauss"] == 150.0
