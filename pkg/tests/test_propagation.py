import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm

from nvregsim.core.algebra import is_unitary, process_fidelity
from nvregsim.core.errors import ConfigValidationError, SequenceError
from nvregsim.simulation.propagation import (
    NS_PER_US,
    FreeEvolution,
    PropagationOptions,
    PulseSegment,
    convergence_check,
    evolve,
    propagate_driven,
    propagate_static,
    riemann_convergence_order,
    pulse_duration_ns,
    sequence_of,
    sine_envelope,
)
from nvregsim.simulation.sequences import PulseStyle, ground_population


def test_pi_pulse_duration():
    assert pulse_duration_ns(np.pi, 23.7) == pytest.approx(21.097, abs=1e-3)
    assert pulse_duration_ns(np.pi / 2, 23.7) == pytest.approx(21.097 / 2, abs=1e-3)


@pytest.mark.parametrize("area", [np.pi, np.pi / 2])
def test_sine_envelope_integrates_to_area(area):
    t_pulse = pulse_duration_ns(area, 23.7)
    integral, _ = quad(lambda t: sine_envelope(t, t_pulse, 23.7, area), 0.0, t_pulse)
    assert integral / NS_PER_US == pytest.approx(area, rel=1e-9)


def test_sine_envelope_outside_support():
    with pytest.raises(SequenceError):
        sine_envelope(30.0, 21.0, 23.7)


def test_pulse_segment_validation():
    with pytest.raises(SequenceError):
        PulseSegment(target=3)
    with pytest.raises(SequenceError):
        PulseSegment(target=1, phase="Z")
    assert PulseSegment(target=1, envelope="instantaneous").duration == 0.0


def test_sequence_of_merges_waits():
    pulse = PulseSegment(1)
    seq = sequence_of(FreeEvolution(10.0), FreeEvolution(5.0), FreeEvolution(0.0), pulse, FreeEvolution(3.0))
    assert len(seq) == 3
    assert seq.items[0].duration == pytest.approx(15.0)
    assert seq.total_duration == pytest.approx(18.0 + pulse.duration)
    starts = [t for t, _ in seq.timeline()]
    assert starts == pytest.approx([0.0, 15.0, 15.0 + pulse.duration])


def test_negative_wait_rejected():
    with pytest.raises(SequenceError):
        FreeEvolution(-1.0)


def test_options_reject_nonpositive_density():
    with pytest.raises(ConfigValidationError):
        PropagationOptions(step_density=0.0)
    with pytest.raises(ConfigValidationError):
        PropagationOptions(sample="end")


def test_propagate_static_matches_expm(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = a + a.conj().T
    u = propagate_static(h, 250.0)
    assert is_unitary(u)
    assert np.allclose(u, expm(-1j * h * 0.25))


def test_sine_pi_pulse_flips_reduced_register(reduced_model, rwa_options):
    seq = sequence_of(PulseStyle(23.7, "sine").pulse(1))
    rho = evolve(reduced_model.initial_state(), propagate_driven(reduced_model, seq, rwa_options))
    assert ground_population(reduced_model, rho, 1) < 1e-3
    assert ground_population(reduced_model, rho, 2) == pytest.approx(1.0)


def test_shaped_and_instantaneous_pulses_agree(reduced_model, rwa_options):
    shaped = propagate_driven(reduced_model, sequence_of(PulseStyle(23.7, "sine").pulse(2, "pi_half", "Y")), rwa_options)
    ideal = propagate_driven(reduced_model, sequence_of(PulseStyle(23.7, "instantaneous").pulse(2, "pi_half", "Y")), rwa_options)
    assert process_fidelity(shaped, ideal) > 0.999


def test_convergence_check_passes_at_reduced_density(reduced_model, rwa_options):
    seq = sequence_of(PulseStyle(23.7, "sine").pulse(1), FreeEvolution(50.0), PulseStyle(23.7, "sine").pulse(2))
    check = convergence_check(reduced_model, seq, 2.0, 20.0, rwa_options)
    assert check.within_tolerance
    assert check.to_dict()["process_infidelity"] < 1e-3


def test_pi_pulse_on_full_register_rwa(setting2_model):
    options = PropagationOptions(step_density=5.0, frame="rwa")
    seq = sequence_of(PulseStyle(23.7, "sine").pulse(2))
    rho = evolve(setting2_model.initial_state(), propagate_driven(setting2_model, seq, options))
    assert np.trace(rho).real == pytest.approx(1.0)
    assert ground_population(setting2_model, rho, 2) < 0.1
    assert ground_population(setting2_model, rho, 1) > 0.9


@pytest.mark.slow
def test_pi_pulse_on_full_register_lab_frame(setting2_model):
    seq = sequence_of(PulseStyle(23.7, "sine").pulse(2))
    u = propagate_driven(setting2_model, seq, PropagationOptions(step_density=20.0))
    assert is_unitary(u, atol=1e-8)
    rho = evolve(setting2_model.initial_state(), u)
    assert ground_population(setting2_model, rho, 2) < 0.1


def test_riemann_product_converges_with_density(reduced_model, rwa_options):
    seq = sequence_of(PulseStyle(23.7, "sine").pulse(1), PulseStyle(23.7, "sine").pulse(2, "pi_half", "Y"))
    order = riemann_convergence_order(reduced_model, seq, 1.0, rwa_options)
    assert order > 0.5
