"""
Named experiments
XY8-n decoupling, the composite sqrt(ZZ) gate, DEER scans, the toggling-frame
gate oracle and the tau1/tau2 calibration procedures.

Times are ns at the interface; t_evol and T2 are us.
"""
from dataclasses import dataclass, field
from functools import partial
import logging
from typing import Dict, List, Optional, Sequence as SequenceType, Tuple

import numpy as np

from nvregsim.core.errors import CalibrationError, SequenceError
from nvregsim.core.fitting import FitResult, fit_sine, sine_minimum_near
from nvregsim.simulation.propagation import (
    NS_PER_US,
    FreeEvolution,
    PropagationOptions,
    PulseSegment,
    Sequence,
    evolve,
    propagate_driven,
    sequence_of,
)
from nvregsim.simulation.readout import (
    ChargeMixture,
    apply_decoherence,
    electron_state,
    povm_readout,
)
from nvregsim.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

XY8_PHASES = ("X", "Y", "X", "Y", "Y", "X", "Y", "X")

# label -> (kind, phase) of the pulse that prepares it from |0>
PREPARATIONS: Dict[str, Optional[Tuple[str, str]]] = {
    "0": None,
    "1": ("pi", "X"),
    "-i": ("pi_half", "X"),
    "+i": ("pi_half", "-X"),
    "+": ("pi_half", "Y"),
    "-": ("pi_half", "-Y"),
}

# projection pulse mapping the measured axis onto the readout axis
PROJECTIONS = {"X": "-Y", "Y": "X"}


@dataclass(frozen=True)
class PulseStyle:
    """Envelope and Rabi frequency shared by every pulse of a sequence."""

    rabi: float = 23.7
    envelope: str = "sine"

    def pulse(self, target: int, kind: str = "pi", phase: str = "X") -> PulseSegment:
        return PulseSegment(target, kind, phase, self.envelope, self.rabi)


def preparation(label: str, target: int, style: PulseStyle = PulseStyle()) -> Sequence:
    if label not in PREPARATIONS:
        raise SequenceError(f"unknown preparation label {label!r}")
    spec = PREPARATIONS[label]
    if spec is None:
        return Sequence()
    return Sequence((style.pulse(target, *spec),))


def _schedule(events: List[Tuple[float, PulseSegment]], body: float, allow_overhang: bool = True) -> Sequence:
    """Turn (center time, pulse) events into a gap-filled sequence starting at 0."""
    events = sorted(events, key=lambda e: e[0])
    items = []
    cursor = 0.0
    for center, pulse in events:
        start = center - pulse.duration / 2
        if start < cursor - 1e-9:
            raise SequenceError(
                f"pulse on NV{pulse.target} centred at {center:.3f} ns collides with the previous pulse",
                {"center_ns": center, "overlap_ns": cursor - start},
            )
        items.append(FreeEvolution(max(start - cursor, 0.0)))
        items.append(pulse)
        cursor = start + pulse.duration
    if cursor < body:
        items.append(FreeEvolution(body - cursor))
    elif not allow_overhang and cursor > body + 1e-9:
        raise SequenceError(f"pulses run {cursor - body:.3f} ns past the end of the sequence body")
    return sequence_of(*items)


def build_xy8(
    target: int, tau1: float, n_xy: int = 1, style: PulseStyle = PulseStyle(), projection: bool = True
) -> Sequence:
    """XY8-n on one NV with pi-pulse centres spaced ``tau1``.

    With ``projection`` the train is framed by (pi/2)_X and (pi/2)_-X so an
    ideal echo returns the NV to its initial state.
    """
    if n_xy < 1:
        raise SequenceError(f"XY8 order must be at least 1, got {n_xy}")
    pi = style.pulse(target)
    if tau1 <= pi.duration:
        raise SequenceError(f"tau1={tau1} ns does not exceed the pi-pulse length {pi.duration:.3f} ns")
    events = [
        (tau1 / 2 + k * tau1, style.pulse(target, "pi", XY8_PHASES[k % 8])) for k in range(8 * n_xy)
    ]
    body = _schedule(events, 8 * n_xy * tau1, allow_overhang=False)
    if not projection:
        return body
    return (
        Sequence((style.pulse(target, "pi_half", "X"),))
        + body
        + Sequence((style.pulse(target, "pi_half", "-X"),))
    )


def _check_tau2(tau1: float, tau2: float, n_pi: int) -> None:
    if n_pi < 4 or n_pi % 4:
        raise SequenceError(f"n_pi must be a positive multiple of 4, got {n_pi}")
    if not -tau1 / 2 - 1e-9 <= tau2 <= tau1 / 2 + 1e-9:
        raise SequenceError(f"tau2={tau2} ns outside [-tau1/2, tau1/2] for tau1={tau1} ns")


def sqrt_zz_events(tau1: float, tau2: float, n_pi: int) -> List[Tuple[float, int]]:
    """Pulse centres (ns) and targets: NV1 at (k - 1/2) tau1, NV2 at k tau1 - tau2."""
    _check_tau2(tau1, tau2, n_pi)
    events = [((k - 0.5) * tau1, 1) for k in range(1, n_pi + 1)]
    events += [(k * tau1 - tau2, 2) for k in range(1, n_pi + 1)]
    return sorted(events)


def build_sqrt_zz(
    tau1: float, tau2: float, n_pi: int = 8, style: PulseStyle = PulseStyle()
) -> Sequence:
    """Interleaved XY8-cycled pi trains on both NVs; the body lasts n_pi * tau1.

    For tau2 below half a pulse length the last NV2 pulse runs past the body.
    """
    counters = {1: 0, 2: 0}
    events = []
    for center, nv in sqrt_zz_events(tau1, tau2, n_pi):
        events.append((center, style.pulse(nv, "pi", XY8_PHASES[counters[nv] % 8])))
        counters[nv] += 1
    return _schedule(events, n_pi * tau1)


def interaction_periods(
    tau1: float, tau2: float, n_pi: int, g: float, delta1: float = 0.0, delta2: float = 0.0
) -> List[Tuple[float, np.ndarray]]:
    """Toggling-frame Hamiltonians of the ideal-pulse gate.

    Returns (duration us, 4x4 diagonal Hamiltonian in |q1 q2> order) for each
    interval between pulses; every pi pulse swaps its NV's level energies.
    Energies follow the reduced model: |11> sits at delta1 + delta2 - g.
    """
    base = np.array([0.0, delta2, delta1, delta1 + delta2 - g])
    flips = np.array([0, 0])
    cursor = 0.0
    periods = []
    events = sqrt_zz_events(tau1, tau2, n_pi)
    end = max(n_pi * tau1, events[-1][0])
    for center, nv in events + [(end, 0)]:
        if center > cursor + 1e-12:
            energies = np.array(
                [base[2 * (a ^ flips[0]) + (b ^ flips[1])] for a in (0, 1) for b in (0, 1)]
            )
            periods.append(((center - cursor) / NS_PER_US, np.diag(energies).astype(complex)))
            cursor = center
        if nv:
            flips[nv - 1] ^= 1
    return periods


def toggling_frame_unitary(
    tau1: float, tau2: float, n_pi: int, g: float, delta1: float = 0.0, delta2: float = 0.0
) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    for duration, h in interaction_periods(tau1, tau2, n_pi, g, delta1, delta2):
        u = np.diag(np.exp(-1j * np.diag(h) * duration)) @ u
    return u


def analytic_gate_unitary(
    tau1: float, tau2: float, n_pi: int, g: float, delta1: float = 0.0, delta2: float = 0.0, sign: int = 1
) -> np.ndarray:
    """diag(1, e^{i chi}, e^{i chi}, 1) with chi = sign * n_pi * g * tau2, up to global phase.

    ``sign`` is the product of the two NVs' excited-level Sz labels; the
    detunings cancel out of the result.  Matches the toggling-frame product
    for 0 <= tau2 <= tau1/2 only: for negative tau2 the last NV2 pulse falls
    after the final NV1 pulse and leaves an extra interaction period.
    """
    _check_tau2(tau1, tau2, n_pi)
    chi = sign * n_pi * g * tau2 / NS_PER_US
    return np.diag([1.0, np.exp(1j * chi), np.exp(1j * chi), 1.0])


def entangling_sign(model) -> int:
    """Sign of the entangling phase: product of the excited-level Sz labels."""
    s1, s2 = model.signs
    return int(s1 * s2)


def calibrated_tau2(nu_dip: float, n_pi: int) -> float:
    """tau2 (ns) at which n_pi * g * tau2 = pi/2."""
    return NS_PER_US / (4.0 * nu_dip * n_pi)


# ============================
# DEER
# ============================

@dataclass(frozen=True)
class DeerScan:
    tau2: np.ndarray
    t_evol: np.ndarray
    signal: np.ndarray
    fit: Optional[FitResult]
    projection: str
    control_state: str

    @property
    def asymmetry(self) -> float:
        return deer_asymmetry(self.fit)

    def to_dict(self) -> dict:
        return {
            "projection": self.projection,
            "control_state": self.control_state,
            "tau2_ns": self.tau2.tolist(),
            "t_evol_us": self.t_evol.tolist(),
            "signal": self.signal.tolist(),
            "fit": self.fit.to_dict() if self.fit is not None else None,
        }


def deer_asymmetry(fit: FitResult) -> float:
    """|y0| / A of a fitted DEER trace."""
    amplitude = abs(fit.value("amplitude"))
    if amplitude < 1e-9:
        raise SequenceError("DEER amplitude vanished; asymmetry undefined")
    return abs(fit.value("offset")) / amplitude


def deer_sequence(
    tau1: float, tau2: float, n_pi: int, projection: str, control_state: str, target: int, style: PulseStyle
) -> Sequence:
    if projection not in PROJECTIONS:
        raise SequenceError(f"projection must be X or Y, got {projection!r}")
    if control_state not in ("0", "1"):
        raise SequenceError(f"control state must be '0' or '1', got {control_state!r}")
    control = 3 - target
    return (
        preparation(control_state, control, style)
        + preparation("-i", target, style)
        + build_sqrt_zz(tau1, tau2, n_pi, style)
        + Sequence((style.pulse(target, "pi_half", PROJECTIONS[projection]),))
    )


def _target_signal(model, rho: np.ndarray, target: int, active=(True, True)) -> float:
    alphas = [0.0, 0.0]
    alphas[target - 1] = model.contrasts[target - 1]
    return povm_readout(rho, alphas[0], alphas[1], model.readout_layout, alternating=True, active=active)


def _deer_point(
    tau2: float, model, tau1: float, n_pi: int, projection: str, control_state: str, target: int,
    style: PulseStyle, options: PropagationOptions, f_init: Tuple[float, float], mixture: Optional[ChargeMixture],
) -> float:
    seq = deer_sequence(tau1, tau2, n_pi, projection, control_state, target, style)
    rho0 = model.initial_state(f_init)
    if mixture is None:
        return _target_signal(model, evolve(rho0, propagate_driven(model, seq, options)), target)

    # NV0 on either centre removes the coupling; an NV0 target gives no contrast
    uncoupled = model.with_coupling(0.0)
    total = 0.0
    for config in mixture.configs:
        if config.weight == 0.0 or not config.active[target - 1]:
            continue
        m = model if config.coupled else uncoupled
        rho = evolve(rho0, propagate_driven(m, seq, options))
        total += config.weight * _target_signal(m, rho, target, config.active)
    return total


def deer_scan(
    model,
    tau1: float,
    tau2_values: SequenceType[float],
    n_pi: int = 32,
    projection: str = "X",
    control_state: str = "0",
    target: int = 2,
    style: PulseStyle = PulseStyle(),
    options: PropagationOptions = PropagationOptions(),
    f_init: Tuple[float, float] = (1.0, 1.0),
    mixture: Optional[ChargeMixture] = None,
    t2: Optional[Tuple[float, float]] = None,
    workers: Optional[int] = None,
    fit: bool = True,
) -> DeerScan:
    """Target-NV coherence vs tau2 with the control NV held in ``control_state``.

    The x-axis of the fit is t_evol = n_pi * tau2 (us), so the fitted
    frequency is the dipolar coupling in MHz.
    """
    tau2_values = np.asarray(tau2_values, dtype=float)
    point = partial(
        _deer_point, model=model, tau1=tau1, n_pi=n_pi, projection=projection, control_state=control_state,
        target=target, style=style, options=options, f_init=f_init, mixture=mixture,
    )
    signal = np.array(ordered_map(point, tau2_values, workers))
    t_evol = n_pi * tau2_values / NS_PER_US
    if t2 is not None:
        duration = n_pi * tau1 / NS_PER_US
        signal = np.array([apply_decoherence(s, duration, *t2) for s in signal])

    result = fit_sine(t_evol, signal, frequency_guess=model.nu_dip) if fit else None
    if result is not None:
        logger.info(
            "DEER %s-projection fit: nu_dip=%.5f MHz (sigma %.2e)",
            projection, result.value("frequency"), result.sigma("frequency"),
        )
    return DeerScan(tau2_values, t_evol, signal, result, projection, control_state)


# ============================
# CALIBRATION
# ============================

@dataclass(frozen=True)
class GateCalibration:
    tau1: float
    tau2_sqrtzz: float
    n_pi: int
    nu_dip: float
    nu_dip_sigma: float
    n_rep: int = 4
    fit: Optional[FitResult] = field(default=None, repr=False)
    tau2_scan: Optional[np.ndarray] = field(default=None, repr=False)
    signal: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if not -self.tau1 / 2 - 1e-9 <= self.tau2_sqrtzz <= self.tau1 / 2 + 1e-9:
            raise CalibrationError(
                f"calibrated tau2={self.tau2_sqrtzz:.3f} ns outside [-tau1/2, tau1/2]"
            )

    @property
    def t_evol(self) -> float:
        """n_pi * tau2 in us."""
        return self.n_pi * self.tau2_sqrtzz / NS_PER_US

    def to_dict(self) -> dict:
        return {
            "tau1_ns": self.tau1,
            "tau2_sqrtzz_ns": self.tau2_sqrtzz,
            "n_pi": self.n_pi,
            "n_rep": self.n_rep,
            "t_sqrtzz_us": self.t_evol,
            "nu_dip_mhz": self.nu_dip,
            "nu_dip_sigma_mhz": self.nu_dip_sigma,
        }


def calibration_sequence(tau1: float, tau2: float, n_pi: int, n_rep: int, style: PulseStyle) -> Sequence:
    both = preparation("-i", 1, style) + preparation("-i", 2, style)
    gate = build_sqrt_zz(tau1, tau2, n_pi, style)
    body = Sequence()
    for _ in range(n_rep):
        body = body + gate
    return both + body + both


def _calibration_point(
    tau2: float, model, tau1: float, n_pi: int, n_rep: int, style: PulseStyle, options: PropagationOptions,
) -> float:
    seq = calibration_sequence(tau1, tau2, n_pi, n_rep, style)
    rho = evolve(model.initial_state(), propagate_driven(model, seq, options))
    a1, a2 = model.contrasts
    return povm_readout(rho, a1, a2, model.readout_layout)


def calibrate_tau2(
    model,
    tau1: float = 800.0,
    n_rep: int = 4,
    n_pi: int = 8,
    tau2_values: Optional[SequenceType[float]] = None,
    style: PulseStyle = PulseStyle(),
    options: PropagationOptions = PropagationOptions(),
    workers: Optional[int] = None,
) -> GateCalibration:
    """Locate the sqrt(ZZ) tau2 from the fluorescence after ``n_rep`` repeated gates.

    The fluorescence follows -cos(n_rep * chi(tau2)), so the fitted frequency
    gives nu_dip = f / (n_rep * n_pi).  The first non-trivial minimum of the
    fitted sine sits at chi = 2 pi / n_rep and the sqrt(ZZ) point at n_rep / 4
    of it.  Only the sqrt(ZZ) point has to lie inside the sweep.
    """
    if n_rep < 1:
        raise CalibrationError(f"n_rep must be positive, got {n_rep}")
    if tau2_values is None:
        tau2_values = np.linspace(0.0, min(400.0, tau1 / 2), 41)
    tau2_values = np.asarray(tau2_values, dtype=float)
    point = partial(
        _calibration_point, model=model, tau1=tau1, n_pi=n_pi, n_rep=n_rep, style=style, options=options
    )
    signal = np.array(ordered_map(point, tau2_values, workers))

    guess = n_rep * n_pi * model.nu_dip / NS_PER_US
    fit = fit_sine(tau2_values, signal, frequency_guess=guess)
    frequency = fit.value("frequency")
    if frequency <= 0:
        raise CalibrationError("fitted calibration trace has no oscillation")
    tau2 = sine_minimum_near(fit, 1.0 / frequency) * n_rep / 4.0
    if not tau2_values.min() <= tau2 <= tau2_values.max():
        raise CalibrationError(
            f"sqrt(ZZ) point at {tau2:.2f} ns lies outside the swept range "
            f"[{tau2_values.min():.1f}, {tau2_values.max():.1f}] ns",
            {"tau2_ns": tau2},
        )

    t_evol = n_pi * tau2 / NS_PER_US
    nu_dip = frequency * NS_PER_US / (n_rep * n_pi)
    sigma = fit.sigma("frequency") * NS_PER_US / (n_rep * n_pi)
    logger.info("calibrated tau2=%.2f ns, t_sqrtzz=%.4f us, nu_dip=%.5f MHz", tau2, t_evol, nu_dip)
    return GateCalibration(tau1, tau2, n_pi, nu_dip, sigma, n_rep, fit, tau2_values, signal)


# ============================
# TAU1 SCAN
# ============================

@dataclass(frozen=True)
class Tau1Scan:
    tau1: np.ndarray
    survival: np.ndarray

    @property
    def recommended_tau1(self) -> float:
        return float(self.tau1[int(np.argmax(self.survival))])

    def to_dict(self) -> dict:
        return {
            "tau1_ns": self.tau1.tolist(),
            "survival": self.survival.tolist(),
            "recommended_tau1_ns": self.recommended_tau1,
        }


def ground_population(model, rho: np.ndarray, nv: int) -> float:
    layout = model.readout_layout
    rho_e = electron_state(rho, layout)
    d1, d2 = layout.electron_dims
    g = layout.qubit_levels[nv - 1][0]
    tensor = rho_e.reshape(d1, d2, d1, d2)
    if nv == 1:
        return float(np.einsum("ijij->i", tensor)[g].real)
    return float(np.einsum("ijij->j", tensor)[g].real)


def _tau1_point(tau1: float, model, n_xy: int, target: int, style: PulseStyle, options: PropagationOptions) -> float:
    seq = build_xy8(target, tau1, n_xy, style)
    rho = evolve(model.initial_state(), propagate_driven(model, seq, options))
    return ground_population(model, rho, target)


def scan_tau1(
    model,
    tau1_values: SequenceType[float],
    n_xy: int = 1,
    target: int = 2,
    style: PulseStyle = PulseStyle(),
    options: PropagationOptions = PropagationOptions(),
    workers: Optional[int] = None,
) -> Tau1Scan:
    """Survival of the target superposition after XY8-n for each pulse spacing."""
    tau1_values = np.asarray(tau1_values, dtype=float)
    point = partial(_tau1_point, model=model, n_xy=n_xy, target=target, style=style, options=options)
    survival = np.array(ordered_map(point, tau1_values, workers))
    scan = Tau1Scan(tau1_values, survival)
    logger.info("tau1 scan: best spacing %.1f ns (survival %.4f)", scan.recommended_tau1, survival.max())
    return scan
