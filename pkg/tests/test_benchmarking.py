import numpy as np
import pytest

from nvregsim.core.errors import BenchmarkingError
from nvregsim.simulation.benchmarking import (
    IdealQubitBackend,
    PulseLevelBackend,
    average_gate_fidelity,
    coherence_limit,
    compose_epc,
    depolarize,
    epc_from_epg,
    epc_t2_limit,
    error_ablation,
    extract_epg2q,
    fit_decay,
    gate_fidelity_projection,
    mean_single_qubit_length,
    repetitive_benchmark,
    run_randomized_benchmarking,
    single_qubit_epc,
)
from nvregsim.simulation.clifford import compose_natives, random_sequence, sqrt_zz_unitary
from nvregsim.simulation.readout import STANDARD_QUBIT_LAYOUT, povm_readout
from nvregsim.simulation.sequences import PulseStyle

T2 = (454.0, 476.0)


@pytest.fixture
def ideal_pulse_backend(reduced_model, ideal_style, rwa_options):
    return PulseLevelBackend(model=reduced_model, style=ideal_style, options=rwa_options)


def test_coherence_limit_of_gate():
    assert coherence_limit(6.4, *T2) == pytest.approx(0.013669, abs=1e-6)


def test_extract_epg2q():
    epg = extract_epg2q(0.149, 0.085, 1.8)
    assert epg == pytest.approx(0.0395, abs=1e-4)
    assert compose_epc(epg, 0.085, 1.0, 1.8) == pytest.approx(0.149)


@pytest.mark.parametrize("args", [(0.1, 0.05, 0.0), (1.0, 0.05, 1.5), (0.1, -0.1, 1.5)])
def test_extract_epg2q_rejects_bad_inputs(args):
    with pytest.raises(BenchmarkingError):
        extract_epg2q(*args)


def test_epc_from_epg():
    assert epc_from_epg(0.01, 2.0) == pytest.approx(0.0199)
    assert epc_t2_limit(0.0, 6.4, 3.0, 1.5, *T2) == pytest.approx(1 - (1 - coherence_limit(6.4, *T2)) ** 1.5)


def test_mean_single_qubit_length():
    assert mean_single_qubit_length(PulseStyle(23.7, "instantaneous")) == 0.0
    assert mean_single_qubit_length(PulseStyle(23.7, "sine")) == pytest.approx(0.75 * 21.097e-3, rel=1e-3)


def test_fit_decay_needs_four_points():
    with pytest.raises(BenchmarkingError):
        fit_decay([0, 1, 2], [1.0, 0.9, 0.8])


def test_fit_decay_epc():
    n = np.arange(8)
    record = fit_decay(n, 0.5 + 0.5 * 0.96**n)
    assert record.p == pytest.approx(0.96, abs=1e-6)
    assert record.epc == pytest.approx(0.75 * 0.04, abs=1e-6)
    assert not record.p_out_of_range


@pytest.mark.parametrize("depolarizing", [0.01, 0.05])
def test_ideal_backend_epc(depolarizing):
    result = run_randomized_benchmarking(IdealQubitBackend(depolarizing), [1, 2, 4, 8, 16], n_random=3, seed=1)
    assert result.record.epc == pytest.approx(0.75 * depolarizing, rel=1e-4)
    assert result.counts.two_qubit > 0


def test_ideal_backend_without_noise_survives():
    result = run_randomized_benchmarking(IdealQubitBackend(), [1, 3, 5], n_random=4, seed=2, fit=False)
    assert result.record is None
    assert np.allclose(result.survival, 1.0, atol=1e-9)


def test_ideal_backend_applies_channel_after_every_clifford(rng):
    _, decompositions = random_sequence(2, 3, rng)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    for gates in decompositions:
        u = compose_natives(gates)
        rho = depolarize(u @ rho @ u.conj().T, 0.05)
    expected = povm_readout(rho, 0.5, 0.5, STANDARD_QUBIT_LAYOUT, alternating=False)

    backend = IdealQubitBackend(0.05, alternating=False)
    flat = [g for gates in decompositions for g in gates]
    assert backend.run(flat, len(decompositions)) == pytest.approx(expected, abs=1e-12)
    assert expected < 1.0


def test_depolarize_keeps_trace_and_rejects_bad_strength():
    rho = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)
    mixed = depolarize(rho, 1.0)
    assert np.allclose(mixed, np.eye(4) / 4)
    assert np.trace(depolarize(rho, 0.3)) == pytest.approx(1.0)
    with pytest.raises(BenchmarkingError):
        depolarize(rho, 1.5)


def test_rb_is_seed_deterministic():
    backend = IdealQubitBackend(0.02)
    a = run_randomized_benchmarking(backend, [1, 2], n_random=3, seed=7, fit=False)
    b = run_randomized_benchmarking(backend, [1, 2], n_random=3, seed=7, fit=False)
    assert a.counts == b.counts
    assert np.array_equal(a.survival, b.survival)


def test_single_qubit_epc_modes():
    backend = IdealQubitBackend(0.02)
    bare = single_qubit_epc(backend, "bare", [1, 2, 4, 8], n_random=3, seed=3)
    stripped = single_qubit_epc(backend, "stripped", [1, 2, 4, 8], n_random=3, seed=3)
    assert bare.epc == pytest.approx(0.01, rel=1e-4)
    assert stripped.epc == pytest.approx(0.015, rel=1e-4)
    assert stripped.result.counts.two_qubit == 0.0
    with pytest.raises(BenchmarkingError):
        single_qubit_epc(backend, "interleaved")


def test_single_qubit_epc_without_fit():
    short = single_qubit_epc(IdealQubitBackend(0.02), "bare", [1, 2], n_random=2)
    with pytest.raises(BenchmarkingError):
        short.epc


def test_pulse_backend_with_ideal_pulses_survives(ideal_pulse_backend):
    result = run_randomized_benchmarking(ideal_pulse_backend, [1, 2, 3], n_random=3, seed=0, fit=False)
    assert np.allclose(result.survival, 1.0, atol=1e-8)


def test_repetitive_benchmark_decay_from_t2(reduced_model, ideal_style, rwa_options):
    result = repetitive_benchmark(
        reduced_model, ("-i", "-i"), range(0, 65, 4), style=ideal_style, options=rwa_options, t2=T2
    )
    assert result.record.pepg == pytest.approx(coherence_limit(6.4, *T2), abs=1e-4)
    assert result.to_dict()["input_state"] == ["-i", "-i"]


def test_repetitive_benchmark_rejects_unknown_state(reduced_model, ideal_style, rwa_options):
    with pytest.raises(BenchmarkingError):
        repetitive_benchmark(reduced_model, ("x", "0"), range(4), style=ideal_style, options=rwa_options)


def test_average_gate_fidelity():
    assert average_gate_fidelity(lambda rho: rho, np.eye(4)) == pytest.approx(1.0)
    x1 = np.kron(np.array([[0, 1], [1, 0]]), np.eye(2))
    assert average_gate_fidelity(lambda rho: rho, x1) == pytest.approx(0.2)
    zz = sqrt_zz_unitary()
    assert average_gate_fidelity(lambda rho: zz @ rho @ zz.conj().T, zz) == pytest.approx(1.0)


def test_gate_fidelity_projection_with_ideal_pulses(reduced_model, rwa_options):
    points = gate_fidelity_projection(reduced_model, [10.0, 23.7], envelope="instantaneous", options=rwa_options, t2=T2)
    for point in points:
        assert point.coherent == pytest.approx(1.0, abs=1e-9)
        assert point.epg_t2 == pytest.approx(coherence_limit(6.4, *T2))
        assert point.total == pytest.approx(1.0 - point.epg_t2)


def test_ablation_attributes_ideal_gates_to_decoherence(ideal_pulse_backend):
    report = error_ablation(ideal_pulse_backend, [23.7], n_cliff=2, n_random=2, t2=T2)
    [point] = report.points
    assert not point.flagged
    assert point.contributions["decoherence"] == pytest.approx(1.0)
    assert point.contributions["all_coherent"] == pytest.approx(0.0, abs=1e-9)
    assert point.contributions["residual"] == pytest.approx(0.0, abs=1e-9)
    assert set(report.to_dict()["toggles"]) == {"full", "ct_off", "polarized", "hfs_off", "all_off"}


@pytest.mark.slow
def test_pulse_level_rb_on_full_register(setting2_model):
    backend = PulseLevelBackend(model=setting2_model)
    result = run_randomized_benchmarking(backend, [1, 2, 3, 4], n_random=2, seed=0)
    assert np.all(result.survival <= 1.0 + 1e-9)
    assert 0.0 < result.record.epc < 0.5


def test_rb_does_not_depend_on_worker_count():
    backend = IdealQubitBackend(0.01)
    serial = run_randomized_benchmarking(backend, [1, 2], n_random=3, seed=4, workers=1, fit=False)
    pooled = run_randomized_benchmarking(backend, [1, 2], n_random=3, seed=4, workers=2, fit=False)
    assert serial.counts == pooled.counts
    assert serial.survival.tolist() == pooled.survival.tolist()
