import numpy as np
import pytest

from nvregsim.core.algebra import equal_up_to_phase
from nvregsim.core.errors import SequenceError
from nvregsim.simulation.hamiltonian import ReducedPairModel
from nvregsim.simulation.propagation import PulseSegment, propagate_driven
from nvregsim.simulation.sequences import (
    PulseStyle,
    analytic_gate_unitary,
    build_sqrt_zz,
    build_xy8,
    calibrate_tau2,
    calibrated_tau2,
    deer_scan,
    deer_sequence,
    entangling_sign,
    preparation,
    scan_tau1,
    sqrt_zz_events,
    toggling_frame_unitary,
)

NU_DIP = 0.11289


def test_calibrated_tau2_gives_quarter_turn():
    tau2 = calibrated_tau2(NU_DIP, 8)
    assert tau2 == pytest.approx(276.8, abs=0.1)
    chi = 8 * 2 * np.pi * NU_DIP * tau2 / 1000.0
    assert chi == pytest.approx(np.pi / 2)


def test_doubling_pi_count_halves_tau2():
    assert calibrated_tau2(NU_DIP, 16) == pytest.approx(calibrated_tau2(NU_DIP, 8) / 2)


def test_xy8_structure():
    seq = build_xy8(1, 400.0, n_xy=2)
    pulses = seq.pulses
    assert [p.kind for p in pulses].count("pi") == 16
    assert pulses[0].kind == pulses[-1].kind == "pi_half"
    assert [p.phase for p in pulses[1:9]] == ["X", "Y", "X", "Y", "Y", "X", "Y", "X"]


def test_xy8_rejects_short_spacing():
    with pytest.raises(SequenceError):
        build_xy8(1, 10.0)


def test_sqrt_zz_event_times():
    events = sqrt_zz_events(800.0, 100.0, 8)
    nv1 = [t for t, nv in events if nv == 1]
    nv2 = [t for t, nv in events if nv == 2]
    assert nv1 == pytest.approx([400.0 + 800.0 * k for k in range(8)])
    assert nv2 == pytest.approx([700.0 + 800.0 * k for k in range(8)])


@pytest.mark.parametrize("tau2", [-401.0, 401.0])
def test_sqrt_zz_rejects_tau2_outside_half_spacing(tau2):
    with pytest.raises(SequenceError):
        sqrt_zz_events(800.0, tau2, 8)


def test_sqrt_zz_requires_multiple_of_four():
    with pytest.raises(SequenceError):
        sqrt_zz_events(800.0, 100.0, 6)


def test_sqrt_zz_body_length():
    seq = build_sqrt_zz(800.0, 100.0, 8, PulseStyle())
    assert seq.total_duration == pytest.approx(6400.0)
    assert len(seq.pulses) == 16


def test_coinciding_pulses_collide():
    with pytest.raises(SequenceError, match="collides"):
        build_sqrt_zz(800.0, 400.0, 8, PulseStyle())


@pytest.mark.parametrize("tau2", [0.0, 50.0, 150.0, 276.8])
def test_toggling_frame_matches_analytic_gate(reduced_model, tau2):
    g = reduced_model.g
    u = toggling_frame_unitary(800.0, tau2, 8, g, delta1=0.4, delta2=-0.3)
    expected = analytic_gate_unitary(800.0, tau2, 8, g, sign=entangling_sign(reduced_model))
    assert equal_up_to_phase(u, expected, atol=1e-9)


def test_toggling_frame_departs_from_analytic_gate_for_negative_tau2(reduced_model):
    g = reduced_model.g
    u = toggling_frame_unitary(800.0, -120.0, 8, g, delta1=0.4, delta2=-0.3)
    expected = analytic_gate_unitary(800.0, -120.0, 8, g, sign=entangling_sign(reduced_model))
    assert not equal_up_to_phase(u, expected, atol=1e-6)


def test_ideal_pulse_gate_matches_analytic_gate(reduced_model, ideal_style, rwa_options):
    tau2 = calibrated_tau2(NU_DIP, 8)
    u = propagate_driven(reduced_model, build_sqrt_zz(800.0, tau2, 8, ideal_style), rwa_options)
    expected = analytic_gate_unitary(800.0, tau2, 8, reduced_model.g, sign=entangling_sign(reduced_model))
    assert equal_up_to_phase(reduced_model.qubit_block(u), expected, atol=1e-8)


def test_preparation_labels(ideal_style):
    assert len(preparation("0", 1, ideal_style)) == 0
    [pulse] = preparation("+", 2, ideal_style).pulses
    assert isinstance(pulse, PulseSegment)
    assert (pulse.kind, pulse.phase, pulse.target) == ("pi_half", "Y", 2)
    with pytest.raises(SequenceError):
        preparation("x", 1, ideal_style)


def test_deer_sequence_rejects_bad_projection(ideal_style):
    with pytest.raises(SequenceError):
        deer_sequence(800.0, 100.0, 8, "Z", "0", 2, ideal_style)


def test_deer_scan_recovers_coupling(reduced_model, ideal_style, rwa_options):
    tau2 = np.linspace(0.0, 380.0, 39)
    scan = deer_scan(reduced_model, 800.0, tau2, n_pi=32, projection="X", style=ideal_style, options=rwa_options)
    assert scan.t_evol[-1] == pytest.approx(32 * 0.38)
    assert scan.fit.value("frequency") == pytest.approx(NU_DIP, rel=1e-3)
    assert scan.asymmetry < 0.02
    assert np.abs(scan.signal).max() <= 1.0 + 1e-9


def test_flipping_control_negates_x_trace_and_keeps_y_trace(reduced_model, ideal_style, rwa_options):
    tau2 = np.linspace(0.0, 380.0, 12)
    traces = {
        (projection, control): deer_scan(
            reduced_model, 800.0, tau2, 8, projection=projection, control_state=control,
            style=ideal_style, options=rwa_options, fit=False,
        ).signal
        for projection in ("X", "Y")
        for control in ("0", "1")
    }
    assert np.abs(traces["X", "0"]).max() > 0.5
    assert np.allclose(traces["X", "1"], -traces["X", "0"], atol=1e-8)
    assert np.allclose(traces["Y", "1"], traces["Y", "0"], atol=1e-8)


def test_deer_scan_with_decoherence_shrinks_signal(reduced_model, ideal_style, rwa_options):
    tau2 = np.linspace(0.0, 380.0, 20)
    clean = deer_scan(reduced_model, 800.0, tau2, 32, style=ideal_style, options=rwa_options, fit=False)
    damped = deer_scan(reduced_model, 800.0, tau2, 32, style=ideal_style, options=rwa_options, t2=(454.0, 476.0), fit=False)
    factor = np.exp(-32 * 0.8 / 465.0)
    assert damped.fit is None
    assert np.allclose(damped.signal, clean.signal * factor)


@pytest.mark.parametrize("n_rep", [2, 4, 8])
def test_calibration_finds_quarter_turn(reduced_model, ideal_style, rwa_options, n_rep):
    calibration = calibrate_tau2(reduced_model, 800.0, n_rep=n_rep, n_pi=8, style=ideal_style, options=rwa_options)
    assert calibration.tau2_sqrtzz == pytest.approx(calibrated_tau2(NU_DIP, 8), rel=0.01)
    assert calibration.nu_dip == pytest.approx(NU_DIP, rel=0.01)
    assert calibration.signal.shape == calibration.tau2_scan.shape
    assert calibration.to_dict()["t_sqrtzz_us"] == pytest.approx(calibration.t_evol)


def test_calibration_gate_time_for_setting_coupling(ideal_style, rwa_options):
    model = ReducedPairModel(0.1198)
    calibration = calibrate_tau2(model, 800.0, n_rep=4, n_pi=8, style=ideal_style, options=rwa_options)
    assert calibration.t_evol == pytest.approx(2.087, rel=0.005)


def test_calibration_with_doubled_pi_count_halves_tau2(reduced_model, ideal_style, rwa_options):
    eight = calibrate_tau2(reduced_model, 800.0, n_rep=4, n_pi=8, style=ideal_style, options=rwa_options)
    sixteen = calibrate_tau2(reduced_model, 800.0, n_rep=4, n_pi=16, style=ideal_style, options=rwa_options)
    assert sixteen.tau2_sqrtzz == pytest.approx(eight.tau2_sqrtzz / 2, rel=0.01)
    assert sixteen.t_evol == pytest.approx(eight.t_evol, rel=0.01)


def test_tau1_scan_with_ideal_pulses_preserves_state(reduced_model, ideal_style, rwa_options):
    scan = scan_tau1(reduced_model, [200.0, 600.0, 1000.0], n_xy=1, target=1, style=ideal_style, options=rwa_options)
    assert np.allclose(scan.survival, 1.0, atol=1e-9)
    assert scan.recommended_tau1 in (200.0, 600.0, 1000.0)
