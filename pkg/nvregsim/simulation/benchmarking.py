"""
Benchmarking
Repetitive benchmarking of the sqrt(ZZ) gate, Clifford randomized
benchmarking with native synthesis, the EPC/EPG error algebra, average gate
fidelity of simulated dynamical maps and error-source ablation.
"""
from dataclasses import dataclass, field, replace
from functools import partial
import logging
from typing import Callable, Dict, List, Optional, Sequence as SequenceType, Tuple

import numpy as np

from nvregsim.core.algebra import PAULI_I, dagger
from nvregsim.core.errors import BenchmarkingError
from nvregsim.core.fitting import FitResult, fit_exponential
from nvregsim.simulation.clifford import (
    GateCounts,
    NativeGate,
    compose_natives,
    gate_counts,
    random_sequence,
    sqrt_zz_unitary,
    strip_entangling,
)
from nvregsim.simulation.propagation import (
    NS_PER_US,
    PropagationOptions,
    PulseSegment,
    Sequence,
    evolve,
    propagate_driven,
    pulse_duration_ns,
)
from nvregsim.simulation.readout import (
    STANDARD_QUBIT_LAYOUT,
    ChargeMixture,
    mean_t2,
    povm_readout,
)
from nvregsim.simulation.sequences import (
    PREPARATIONS,
    PulseStyle,
    build_sqrt_zz,
    calibrated_tau2,
    entangling_sign,
    preparation,
)
from nvregsim.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

REPETITIVE_INPUT_STATES = (
    ("0", "0"), ("1", "0"), ("0", "1"), ("1", "1"),
    ("-i", "0"), ("0", "-i"), ("+", "0"),
    ("-i", "-i"), ("+", "+"),
)


# ============================
# DECAYS AND ERROR ALGEBRA
# ============================

@dataclass(frozen=True)
class DecayRecord:
    xs: np.ndarray
    ys: np.ndarray
    fit: FitResult
    n_qubits: int = 2

    @property
    def p(self) -> float:
        return self.fit.value("p")

    @property
    def p_out_of_range(self) -> bool:
        return not 0.0 < self.p <= 1.0 + 1e-9

    @property
    def pepg(self) -> float:
        return 1.0 - self.p

    @property
    def epc(self) -> float:
        dim = 2**self.n_qubits
        return (dim - 1) / dim * (1.0 - self.p)

    @property
    def epc_sigma(self) -> float:
        dim = 2**self.n_qubits
        return (dim - 1) / dim * self.fit.sigma("p")

    def to_dict(self) -> dict:
        return {
            "n": self.xs.tolist(),
            "signal": self.ys.tolist(),
            "fit": self.fit.to_dict(),
            "p": self.p,
            "pepg": self.pepg,
            "epc": self.epc,
            "epc_sigma": self.epc_sigma,
            "p_out_of_range": self.p_out_of_range,
        }


def fit_decay(
    xs: SequenceType[float], ys: SequenceType[float], fix_y0: Optional[float] = None, n_qubits: int = 2
) -> DecayRecord:
    """Fit y0 + a p**n; p outside (0, 1] is flagged, not rejected."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 4:
        raise BenchmarkingError(f"decay fit needs at least 4 points, got {xs.size}")
    record = DecayRecord(xs, ys, fit_exponential(xs, ys, fix_y0=fix_y0), n_qubits)
    if record.p_out_of_range:
        logger.warning("fitted decay parameter p=%.6f outside (0, 1]", record.p)
    return record


def coherence_limit(t_gate: float, t2_nv1: float, t2_nv2: float) -> float:
    """Polarization lost per gate of length ``t_gate`` (us) to the mean T2."""
    return float(1.0 - np.exp(-t_gate / mean_t2(t2_nv1, t2_nv2)))


def epc_from_epg(epg: float, gpc: float) -> float:
    return float(1.0 - (1.0 - epg) ** gpc)


def compose_epc(epg_2q: float, epg_1q: float, gpc_1q: float, gpc_2q: float) -> float:
    return float(1.0 - (1.0 - epg_2q) ** gpc_2q * (1.0 - epg_1q) ** gpc_1q)


def extract_epg2q(epc: float, epc_1q: float, gpc_2q: float) -> float:
    """Solve 1 - EPC = (1 - EPG2q)**GPC2q (1 - EPC1q) for EPG2q."""
    if gpc_2q <= 0:
        raise BenchmarkingError(f"two-qubit gates per Clifford must be positive, got {gpc_2q}")
    if not 0 <= epc < 1 or not 0 <= epc_1q < 1:
        raise BenchmarkingError(f"error rates outside [0, 1): EPC={epc}, EPC1q={epc_1q}")
    epg = float(1.0 - ((1.0 - epc) / (1.0 - epc_1q)) ** (1.0 / gpc_2q))
    if epg < 0:
        logger.warning("EPG2q=%.4f is negative: single-qubit error exceeds the total", epg)
    return epg


def epc_t2_limit(
    t_1q: float, t_2q: float, gpc_1q: float, gpc_2q: float, t2_nv1: float, t2_nv2: float
) -> float:
    """Coherence-limited error per Clifford from the mean 1q gate length and the 2q gate length (us)."""
    return compose_epc(
        coherence_limit(t_2q, t2_nv1, t2_nv2), coherence_limit(t_1q, t2_nv1, t2_nv2), gpc_1q, gpc_2q
    )


# ============================
# REPETITIVE BENCHMARKING
# ============================

def _ideal_preparation(labels: Tuple[str, str]) -> np.ndarray:
    ops = []
    for label in labels:
        spec = PREPARATIONS[label]
        ops.append(PAULI_I if spec is None else NativeGate(*spec, target=1).qubit_unitary())
    return np.kron(ops[0], ops[1])


def _prepare(labels: Tuple[str, str], style: PulseStyle) -> Sequence:
    for label in labels:
        if label not in PREPARATIONS:
            raise BenchmarkingError(f"input state {label!r} is not preparable with native pulses")
    return preparation(labels[0], 1, style) + preparation(labels[1], 2, style)


@dataclass(frozen=True)
class RepetitiveResult:
    input_state: Tuple[str, str]
    n: np.ndarray
    signal: np.ndarray
    record: Optional[DecayRecord]

    @property
    def modulation_depth(self) -> float:
        """Mean signal at n = 0 mod 4 minus mean signal at n = 2 mod 4."""
        at0 = self.signal[self.n % 4 == 0]
        at2 = self.signal[self.n % 4 == 2]
        if not at0.size or not at2.size:
            raise BenchmarkingError("modulation depth needs gate counts at both 0 and 2 mod 4")
        return float(at0.mean() - at2.mean())

    def to_dict(self) -> dict:
        out = {
            "input_state": list(self.input_state),
            "n": self.n.tolist(),
            "signal": self.signal.tolist(),
            "decay": self.record.to_dict() if self.record is not None else None,
        }
        try:
            out["modulation_depth"] = self.modulation_depth
        except BenchmarkingError:
            out["modulation_depth"] = None
        return out


def repetitive_benchmark(
    model,
    input_state: Tuple[str, str] = ("-i", "-i"),
    n_list: SequenceType[int] = tuple(range(17)),
    mixture: Optional[ChargeMixture] = None,
    reverse: bool = True,
    tau1: float = 800.0,
    n_pi: int = 8,
    style: PulseStyle = PulseStyle(),
    options: PropagationOptions = PropagationOptions(),
    f_init: Tuple[float, float] = (1.0, 1.0),
    t2: Optional[Tuple[float, float]] = None,
    fit: bool = True,
) -> RepetitiveResult:
    """Surviving polarization after n calibrated sqrt(ZZ) gates.

    The ideal inverse of preparation and gates is applied before readout when
    ``reverse`` is set.  With a charge mixture every configuration is
    simulated (NV0 removes the coupling and the NV's contrast) and the
    weighted signal is normalised by the weighted |00> reference.
    """
    n_list = np.asarray(n_list, dtype=int)
    tau2 = calibrated_tau2(model.nu_dip, n_pi)
    chi = entangling_sign(model) * np.pi / 2
    prep_seq = _prepare(input_state, style)
    gate_seq = build_sqrt_zz(tau1, tau2, n_pi, style)
    prep_ideal = _ideal_preparation(input_state)
    zz_ideal = sqrt_zz_unitary(chi)
    alphas = model.contrasts
    mixture = mixture or ChargeMixture.pure()
    rho0 = model.initial_state(f_init)

    weighted = np.zeros(n_list.size)
    reference = 0.0
    for config in mixture.configs:
        if config.weight == 0.0 or not any(config.active):
            continue
        m = model if config.coupled else model.with_coupling(0.0)
        u_prep = propagate_driven(m, prep_seq, options)
        u_gate = propagate_driven(m, gate_seq, options, t0=prep_seq.total_duration)
        reference += config.weight * povm_readout(rho0, *alphas, m.readout_layout, active=config.active)

        for k, n in enumerate(n_list):
            total = np.linalg.matrix_power(u_gate, int(n)) @ u_prep
            if reverse:
                ideal = np.linalg.matrix_power(zz_ideal, int(n)) @ prep_ideal
                total = m.embed_qubit_unitary(dagger(ideal)) @ total
            rho = evolve(rho0, total)
            weighted[k] += config.weight * povm_readout(rho, *alphas, m.readout_layout, active=config.active)

    if reference <= 0:
        raise BenchmarkingError("charge mixture leaves no readout contrast")
    signal = weighted / reference
    if t2 is not None:
        signal = signal * np.exp(-n_list * n_pi * tau1 / NS_PER_US / mean_t2(*t2))

    record = fit_decay(n_list, signal) if fit and n_list.size >= 4 else None
    if record is not None:
        logger.info("repetitive benchmark %s: pEPG=%.4f", "".join(input_state), record.pepg)
    return RepetitiveResult(tuple(input_state), n_list, signal, record)


# ============================
# RANDOMIZED BENCHMARKING BACKENDS
# ============================

def _mask_alphas(alphas: Tuple[float, float], active: Tuple[bool, bool]) -> Tuple[float, float]:
    return tuple(a if on else 0.0 for a, on in zip(alphas, active))


def depolarize(rho: np.ndarray, strength: float) -> np.ndarray:
    """(1 - d) rho + d tr(rho) I / dim."""
    if not 0.0 <= strength <= 1.0:
        raise BenchmarkingError(f"depolarizing strength must lie in [0, 1], got {strength}")
    dim = rho.shape[0]
    return (1.0 - strength) * rho + strength * np.trace(rho) * np.eye(dim) / dim


@dataclass(frozen=True)
class IdealQubitBackend:
    """Ideal gates on two qubits with a depolarizing channel of strength ``depolarizing`` per Clifford."""

    depolarizing: float = 0.0
    chi: float = np.pi / 2
    alternating: bool = True

    def run(self, gates: SequenceType[NativeGate], n_cliffords: int, active=(True, True)) -> float:
        u = compose_natives(gates, self.chi)
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = 1.0
        rho = evolve(rho, u)
        # the channel commutes with every unitary, so one application per
        # Clifford may be collected after the composed sequence
        for _ in range(n_cliffords):
            rho = depolarize(rho, self.depolarizing)
        alphas = _mask_alphas((0.5, 0.5), active)
        return float(povm_readout(rho, *alphas, STANDARD_QUBIT_LAYOUT, alternating=self.alternating))

    def sequence_duration(self, gates: SequenceType[NativeGate]) -> float:
        return 0.0


@dataclass(frozen=True)
class PulseLevelBackend:
    """Native gates realised as shaped pulses and the calibrated sqrt(ZZ) on a register model."""

    model: object
    tau1: float = 800.0
    n_pi: int = 8
    style: PulseStyle = PulseStyle()
    options: PropagationOptions = PropagationOptions(step_density=2.0)
    f_init: Tuple[float, float] = (1.0, 1.0)
    nuclear: str = "mixed"
    alternating: bool = True

    @property
    def chi(self) -> float:
        return entangling_sign(self.model) * np.pi / 2

    @property
    def tau2(self) -> float:
        return calibrated_tau2(self.model.nu_dip, self.n_pi)

    def to_sequence(self, gates: SequenceType[NativeGate]) -> Sequence:
        seq = Sequence()
        zz = None
        for gate in gates:
            if gate.is_entangling:
                zz = zz or build_sqrt_zz(self.tau1, self.tau2, self.n_pi, self.style)
                seq = seq + zz
            else:
                seq = seq + Sequence((self.style.pulse(gate.target, gate.kind, gate.phase),))
        return seq

    def sequence_duration(self, gates: SequenceType[NativeGate]) -> float:
        """Length in us."""
        return self.to_sequence(gates).total_duration / NS_PER_US

    def run(self, gates: SequenceType[NativeGate], n_cliffords: int, active=(True, True)) -> float:
        u = propagate_driven(self.model, self.to_sequence(gates), self.options)
        rho = evolve(self.model.initial_state(self.f_init, self.nuclear), u)
        alphas = _mask_alphas(self.model.contrasts, active)
        return povm_readout(rho, *alphas, self.model.readout_layout, alternating=self.alternating)

    def with_model(self, model) -> "PulseLevelBackend":
        return replace(self, model=model)


@dataclass(frozen=True)
class RbResult:
    lengths: np.ndarray
    survival: np.ndarray
    record: Optional[DecayRecord]
    counts: GateCounts
    durations: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    @property
    def mean_survival(self) -> np.ndarray:
        return self.survival.mean(axis=1)

    def to_dict(self) -> dict:
        return {
            "lengths": self.lengths.tolist(),
            "mean_survival": self.mean_survival.tolist(),
            "survival": self.survival.tolist(),
            "decay": self.record.to_dict() if self.record is not None else None,
            "gate_counts": self.counts.to_dict(),
        }


def _retarget(gates: List[NativeGate], target: int) -> List[NativeGate]:
    return [replace(g, target=target) if not g.is_entangling else g for g in gates]


def _rb_job(
    job: Tuple[int, int], backend, seed: int, n_qubits: int, target: int, stripped: bool
) -> Tuple[float, List[List[NativeGate]], float]:
    length, k = job
    rng = np.random.default_rng([seed, length, k])
    _, decompositions = random_sequence(n_qubits, length, rng, backend.chi)
    if n_qubits == 1:
        decompositions = [_retarget(d, target) for d in decompositions]
    gates = [g for d in decompositions for g in d]
    if stripped:
        gates = strip_entangling(gates)
    active = (True, True) if n_qubits == 2 else (target == 1, target == 2)
    value = backend.run(gates, length + 1, active)
    return value, decompositions, backend.sequence_duration(gates)


def run_randomized_benchmarking(
    backend,
    lengths: SequenceType[int],
    n_random: int = 20,
    seed: int = 0,
    n_qubits: int = 2,
    target: int = 1,
    stripped: bool = False,
    fix_y0: Optional[float] = None,
    workers: Optional[int] = None,
    fit: bool = True,
) -> RbResult:
    """Random Clifford sequences closed by the ideal inverse, averaged per length.

    Sequence (length, k) draws from a generator seeded by (seed, length, k), so
    results do not depend on the worker count.
    """
    if n_random < 1:
        raise BenchmarkingError(f"n_random must be at least 1, got {n_random}")
    lengths = np.asarray(lengths, dtype=int)
    jobs = [(int(m), k) for m in lengths for k in range(n_random)]
    job = partial(_rb_job, backend=backend, seed=seed, n_qubits=n_qubits, target=target, stripped=stripped)
    outcomes = ordered_map(job, jobs, workers)

    survival = np.array([o[0] for o in outcomes]).reshape(lengths.size, n_random)
    durations = np.array([o[2] for o in outcomes]).reshape(lengths.size, n_random)
    decompositions = [d for o in outcomes for d in o[1]]
    counts = gate_counts(decompositions)
    if stripped:
        counts = GateCounts(counts.single_qubit, 0.0)

    record = None
    if fit and lengths.size >= 4:
        record = fit_decay(lengths, survival.mean(axis=1), fix_y0=fix_y0, n_qubits=n_qubits if not stripped else 2)
        logger.info("RB (%dq%s): EPC=%.4f +- %.4f", n_qubits, ", stripped" if stripped else "", record.epc, record.epc_sigma)
    return RbResult(lengths, survival, record, counts, durations)


@dataclass(frozen=True)
class SingleQubitEpc:
    mode: str
    result: RbResult

    @property
    def epc(self) -> float:
        if self.result.record is None:
            raise BenchmarkingError("single-qubit RB has no decay fit (fewer than 4 lengths)")
        return self.result.record.epc

    @property
    def fidelity(self) -> float:
        """Effective per-gate fidelity (1 - EPC1q)**(1/GPC1q)."""
        gpc = self.result.counts.single_qubit
        if gpc <= 0:
            return 1.0
        return float((1.0 - self.epc) ** (1.0 / gpc))

    def to_dict(self) -> dict:
        return {"mode": self.mode, "epc_1q": self.epc, "f_1q": self.fidelity, "rb": self.result.to_dict()}


def single_qubit_epc(
    backend,
    mode: str = "stripped",
    lengths: SequenceType[int] = (1, 2, 4, 8, 16),
    n_random: int = 20,
    seed: int = 0,
    target: int = 1,
    workers: Optional[int] = None,
) -> SingleQubitEpc:
    """Single-qubit error per Clifford.

    ``bare`` benchmarks one NV with single-qubit Cliffords; ``stripped`` runs
    two-qubit sequences with every entangling gate removed and corrections
    appended.
    """
    if mode == "bare":
        result = run_randomized_benchmarking(backend, lengths, n_random, seed, 1, target, workers=workers)
    elif mode == "stripped":
        result = run_randomized_benchmarking(backend, lengths, n_random, seed, 2, stripped=True, workers=workers)
    else:
        raise BenchmarkingError(f"unknown single-qubit benchmarking mode {mode!r}")
    return SingleQubitEpc(mode, result)


# ============================
# GATE FIDELITY
# ============================

DynamicalMap = Callable[[np.ndarray], np.ndarray]


def dynamical_map(model, u: np.ndarray, nuclear: str = "mixed") -> DynamicalMap:
    """rho (4x4 qubit state) -> qubit block of Tr_n(U (rho x rho_n) U†)."""

    def apply(rho4: np.ndarray) -> np.ndarray:
        return model.qubit_block(evolve(model.embed_qubit_state(rho4, nuclear), u))

    return apply


def average_gate_fidelity(dmap: DynamicalMap, target: np.ndarray) -> float:
    """Average fidelity of ``dmap`` to the unitary ``target`` over the computational basis."""
    d = target.shape[0]
    basis = np.eye(d, dtype=complex)
    total = 0.0 + 0.0j
    identity_image = np.zeros((d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            image = dmap(np.outer(basis[i], basis[j]))
            if i == j:
                identity_image += image
            total += (dagger(target) @ image @ target)[i, j]
    return float(((total + np.trace(identity_image)) / (d * (d + 1))).real)


@dataclass(frozen=True)
class FidelityPoint:
    rabi: float
    coherent: float
    epg_t2: float

    @property
    def total(self) -> float:
        return self.coherent * (1.0 - self.epg_t2)

    def to_dict(self) -> dict:
        return {"rabi_mhz": self.rabi, "f_coherent": self.coherent, "epg_t2": self.epg_t2, "f_total": self.total}


def gate_fidelity_projection(
    model,
    rabi_values: SequenceType[float],
    tau1: float = 800.0,
    n_pi: int = 8,
    envelope: str = "sine",
    options: PropagationOptions = PropagationOptions(),
    nuclear: str = "mixed",
    t2: Tuple[float, float] = (454.0, 476.0),
    workers: Optional[int] = None,
) -> List[FidelityPoint]:
    """Average fidelity of the calibrated sqrt(ZZ) gate against Rabi frequency, with the T2 factor."""
    job = partial(_fidelity_job, model=model, tau1=tau1, n_pi=n_pi, envelope=envelope, options=options, nuclear=nuclear)
    coherent = ordered_map(job, list(rabi_values), workers)
    epg_t2 = coherence_limit(n_pi * tau1 / NS_PER_US, *t2)
    return [FidelityPoint(float(r), float(f), epg_t2) for r, f in zip(rabi_values, coherent)]


def _fidelity_job(rabi: float, model, tau1: float, n_pi: int, envelope: str, options, nuclear: str) -> float:
    seq = build_sqrt_zz(tau1, calibrated_tau2(model.nu_dip, n_pi), n_pi, PulseStyle(rabi, envelope))
    u = propagate_driven(model, seq, options)
    target = sqrt_zz_unitary(entangling_sign(model) * np.pi / 2)
    return average_gate_fidelity(dynamical_map(model, u, nuclear), target)


# ============================
# ERROR ABLATION
# ============================

ABLATION_TOGGLES = ("full", "ct_off", "polarized", "hfs_off", "all_off")


def _toggle_backend(base: PulseLevelBackend, toggle: str) -> PulseLevelBackend:
    model, options, nuclear = base.model, base.options, base.nuclear
    if toggle in ("ct_off", "all_off"):
        options = replace(options, crosstalk=False)
    if toggle == "polarized":
        nuclear = "polarized"
    if toggle in ("hfs_off", "all_off"):
        model = model.with_hyperfine(False)
    return replace(base, model=model, options=options, nuclear=nuclear)


@dataclass(frozen=True)
class AblationPoint:
    rabi: float
    z_sim: Dict[str, float]
    p: Dict[str, float]
    epc_t2: float
    delta_full: float
    contributions: Dict[str, float]
    flagged: bool

    def to_dict(self) -> dict:
        return {
            "rabi_mhz": self.rabi,
            "z_sim": self.z_sim,
            "p": self.p,
            "epc_t2": self.epc_t2,
            "delta_full": self.delta_full,
            "contributions": self.contributions,
            "flagged": self.flagged,
        }


@dataclass(frozen=True)
class AblationReport:
    points: List[AblationPoint]
    n_cliff: int
    spam: Tuple[float, float]
    toggles: Tuple[str, ...] = ABLATION_TOGGLES

    def to_dict(self) -> dict:
        return {
            "n_cliff": self.n_cliff,
            "spam": {"a": self.spam[0], "y0": self.spam[1]},
            "toggles": list(self.toggles),
            "points": [p.to_dict() for p in self.points],
        }


def _p_from_z(z: float, n_cliff: int, a: float, y0: float) -> float:
    base = (z - y0) / a
    if base <= 0:
        return float("nan")
    return float(base ** (1.0 / n_cliff))


def mean_single_qubit_length(style: PulseStyle) -> float:
    """Average native pulse length (us): pi and pi/2 pulses weighted equally."""
    if style.envelope == "instantaneous":
        return 0.0
    return 0.5 * (pulse_duration_ns(np.pi, style.rabi) + pulse_duration_ns(np.pi / 2, style.rabi)) / NS_PER_US


def error_ablation(
    base: PulseLevelBackend,
    rabi_values: SequenceType[float],
    n_cliff: int = 2,
    n_random: int = 10,
    seed: int = 0,
    spam: Tuple[float, float] = (1.0, 0.0),
    spam_scale: Optional[float] = None,
    t2: Tuple[float, float] = (454.0, 476.0),
    workers: Optional[int] = None,
) -> AblationReport:
    """Relative error contributions per Rabi frequency.

    Each error source is removed in turn (crosstalk/leakage, unpolarized
    nitrogen, hyperfine, all at once); z_sim at ``n_cliff`` Cliffords is scaled
    by the coherence-limited EPC and converted to p with the supplied SPAM
    parameters.  Readout is non-alternating.
    """
    a, y0 = spam
    scale = a if spam_scale is None else spam_scale
    base = replace(base, alternating=False)
    points = []
    for rabi in rabi_values:
        backend = replace(base, style=PulseStyle(float(rabi), base.style.envelope))
        z, p = {}, {}
        counts = None
        for toggle in ABLATION_TOGGLES:
            result = run_randomized_benchmarking(
                _toggle_backend(backend, toggle), [n_cliff], n_random, seed, workers=workers, fit=False
            )
            z[toggle] = float(result.mean_survival[0])
            counts = counts or result.counts

        epc_t2 = epc_t2_limit(
            mean_single_qubit_length(backend.style),
            backend.n_pi * backend.tau1 / NS_PER_US,
            counts.single_qubit,
            counts.two_qubit,
            *t2,
        )
        for toggle in ABLATION_TOGGLES:
            p[toggle] = _p_from_z(scale * z[toggle] * (1.0 - epc_t2), n_cliff, a, y0)
        p_t2_only = _p_from_z(scale * (1.0 - epc_t2), n_cliff, a, y0)

        delta = {k: 1.0 - v for k, v in p.items()}
        flagged = any(not (0.0 < v <= 1.0 + 1e-9) for v in list(p.values()) + [p_t2_only])
        delta_full = delta["full"]
        if flagged or abs(delta_full) < 1e-12:
            logger.warning("ablation point at %.2f MHz flagged (p outside (0, 1] or no error)", rabi)
            contributions = {}
            flagged = True
        else:
            c_r = {k: 1.0 - delta[k] / delta_full for k in ("ct_off", "polarized", "hfs_off", "all_off")}
            c_t2 = (1.0 - p_t2_only) / delta_full
            contributions = {
                "crosstalk_leakage": c_r["ct_off"],
                "unpolarized_nitrogen": c_r["polarized"],
                "misaligned_field": c_r["hfs_off"] - c_r["polarized"],
                "hyperfine_total": c_r["hfs_off"],
                "all_coherent": c_r["all_off"],
                "decoherence": c_t2,
                "residual": (1.0 - c_t2) - c_r["all_off"],
            }
        points.append(AblationPoint(float(rabi), z, p, epc_t2, delta_full, contributions, flagged))
        logger.info("ablation at %.2f MHz: delta_full=%.4f", rabi, delta_full)
    return AblationReport(points, n_cliff, (a, y0))
