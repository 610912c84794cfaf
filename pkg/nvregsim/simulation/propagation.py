"""
Time evolution
Pulse envelopes, the pulse/free-evolution sequence container, exact static
propagators in the carrier frame and the time-ordered Riemann product for
driven segments.

Durations are nanoseconds at the interface; propagators work in microseconds.
"""
from dataclasses import dataclass, field
import logging
import math
from typing import Iterator, List, Optional, Sequence as SequenceType, Tuple, Union

import numpy as np
from scipy.linalg import expm

from nvregsim.core.algebra import PAULI_X, PAULI_Y, dagger, process_fidelity
from nvregsim.core.errors import ConfigValidationError, SequenceError
from nvregsim.simulation.hamiltonian import Control, DriveOptions

logger = logging.getLogger(__name__)

NS_PER_US = 1000.0
DEFAULT_STEP_DENSITY = 20.0

PULSE_AREAS = {"pi": np.pi, "pi_half": np.pi / 2}
PULSE_PHASES = {"X": 0.0, "Y": np.pi / 2, "-X": np.pi, "-Y": 3 * np.pi / 2}
ENVELOPES = ("sine", "rectangular", "instantaneous")


def qubit_rotation(theta: float, phi: float) -> np.ndarray:
    """exp(-i theta/2 (cos phi X + sin phi Y)) on the (ground, excited) pair."""
    axis = np.cos(phi) * PAULI_X + np.sin(phi) * PAULI_Y
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * axis


def pulse_duration_ns(area: float, rabi: float) -> float:
    """Length of a pulse of the given area at Rabi frequency ``rabi`` (cyclic MHz)."""
    if rabi <= 0:
        raise SequenceError(f"Rabi frequency must be positive, got {rabi}")
    return area / (2 * np.pi * rabi) * NS_PER_US


def sine_envelope(t: float, t_pulse: float, rabi: float, area: float = np.pi) -> float:
    """Drive amplitude (rad/us) at ``t`` ns into a sine-shaped pulse of length ``t_pulse`` ns.

    The peak is area*pi/(2 t_pulse), so a pi pulse of length 1/(2 rabi) peaks
    at (pi/2) * 2 pi rabi.
    """
    if t_pulse <= 0:
        raise SequenceError(f"pulse length must be positive, got {t_pulse}")
    if t < -1e-12 or t > t_pulse + 1e-12:
        raise SequenceError(f"t={t} ns outside the pulse support [0, {t_pulse}]")
    t_pulse_us = t_pulse / NS_PER_US
    omega_max = area * np.pi / (2 * t_pulse_us)
    return float(omega_max * np.sin(np.pi * t / t_pulse))


@dataclass(frozen=True)
class PulseSegment:
    target: int
    kind: str = "pi"
    phase: str = "X"
    envelope: str = "sine"
    rabi: float = 23.7
    xi: float = 0.0

    def __post_init__(self):
        if self.target not in (1, 2):
            raise SequenceError(f"pulse target must be NV 1 or 2, got {self.target}")
        if self.kind not in PULSE_AREAS:
            raise SequenceError(f"unknown pulse kind {self.kind!r}")
        if self.phase not in PULSE_PHASES:
            raise SequenceError(f"unknown pulse phase {self.phase!r}")
        if self.envelope not in ENVELOPES:
            raise SequenceError(f"unknown envelope {self.envelope!r}")
        if self.envelope != "instantaneous" and self.rabi <= 0:
            raise SequenceError(f"Rabi frequency must be positive, got {self.rabi}")

    @property
    def area(self) -> float:
        return PULSE_AREAS[self.kind]

    @property
    def phi(self) -> float:
        return PULSE_PHASES[self.phase]

    @property
    def duration(self) -> float:
        if self.envelope == "instantaneous":
            return 0.0
        return pulse_duration_ns(self.area, self.rabi)

    def amplitude(self, t: float) -> float:
        """Envelope in rad/us at ``t`` ns after the pulse starts."""
        if self.envelope == "rectangular":
            return 2 * np.pi * self.rabi
        if self.envelope == "sine":
            return sine_envelope(t, self.duration, self.rabi, self.area)
        return 0.0

    def ideal_unitary(self) -> np.ndarray:
        return qubit_rotation(self.area, self.phi - self.xi)

    def with_envelope(self, envelope: str, rabi: Optional[float] = None) -> "PulseSegment":
        return PulseSegment(self.target, self.kind, self.phase, envelope, self.rabi if rabi is None else rabi, self.xi)


@dataclass(frozen=True)
class FreeEvolution:
    duration: float

    def __post_init__(self):
        if self.duration < -1e-9:
            raise SequenceError(f"free evolution of negative length {self.duration} ns")


Segment = Union[PulseSegment, FreeEvolution]


@dataclass(frozen=True)
class Sequence:
    """Ordered, non-overlapping pulses and waits; one NV is driven at a time."""

    items: Tuple[Segment, ...] = field(default_factory=tuple)

    @property
    def total_duration(self) -> float:
        return float(sum(item.duration for item in self.items))

    @property
    def pulses(self) -> List[PulseSegment]:
        return [item for item in self.items if isinstance(item, PulseSegment)]

    def timeline(self) -> Iterator[Tuple[float, Segment]]:
        """Yield (start time ns, segment)."""
        t = 0.0
        for item in self.items:
            yield t, item
            t += item.duration

    def __add__(self, other: "Sequence") -> "Sequence":
        return Sequence(self.items + other.items)

    def __len__(self) -> int:
        return len(self.items)

    def with_envelope(self, envelope: str, rabi: Optional[float] = None) -> "Sequence":
        return Sequence(
            tuple(i.with_envelope(envelope, rabi) if isinstance(i, PulseSegment) else i for i in self.items)
        )


def sequence_of(*items: Segment) -> Sequence:
    """Build a sequence, merging adjacent waits and dropping empty ones."""
    merged: List[Segment] = []
    for item in items:
        if isinstance(item, FreeEvolution):
            if item.duration <= 1e-12:
                continue
            if merged and isinstance(merged[-1], FreeEvolution):
                merged[-1] = FreeEvolution(merged[-1].duration + item.duration)
                continue
        merged.append(item)
    return Sequence(tuple(merged))


@dataclass(frozen=True)
class PropagationOptions:
    step_density: float = DEFAULT_STEP_DENSITY
    frame: str = "lab"
    sample: str = "start"
    crosstalk: bool = True
    drive_nuclear: bool = True

    def __post_init__(self):
        if self.step_density <= 0:
            raise ConfigValidationError(f"step density must be positive, got {self.step_density}")
        if self.frame not in ("lab", "rwa"):
            raise ConfigValidationError(f"unknown propagation frame {self.frame!r}")
        if self.sample not in ("start", "midpoint"):
            raise ConfigValidationError(f"unknown Riemann sample point {self.sample!r}")

    @property
    def drive(self) -> DriveOptions:
        return DriveOptions(crosstalk=self.crosstalk, drive_nuclear=self.drive_nuclear)

    def with_density(self, density: float) -> "PropagationOptions":
        return PropagationOptions(density, self.frame, self.sample, self.crosstalk, self.drive_nuclear)


def propagate_static(
    h_free: np.ndarray, t: float, frame_diag: Optional[np.ndarray] = None, t0: float = 0.0
) -> np.ndarray:
    """Carrier-frame propagator of a time-independent Hamiltonian from ``t0`` to ``t0 + t`` (ns).

    Without ``frame_diag`` this is the lab-frame exp(-i H t).
    """
    values, vectors = np.linalg.eigh(h_free)
    dt = t / NS_PER_US
    lab = (vectors * np.exp(-1j * values * dt)) @ dagger(vectors)
    if frame_diag is None:
        return lab
    t0_us = t0 / NS_PER_US
    t1_us = t0_us + dt
    return np.exp(1j * frame_diag * t1_us)[:, None] * lab * np.exp(-1j * frame_diag * t0_us)[None, :]


def _driven_segment(model, pulse: PulseSegment, t_start: float, options: PropagationOptions) -> np.ndarray:
    n_steps = max(1, math.ceil(pulse.duration * options.step_density - 1e-9))
    tau_ns = pulse.duration / n_steps
    tau_us = tau_ns / NS_PER_US
    offset = 0.5 * tau_ns if options.sample == "midpoint" else 0.0
    cos_phi, sin_phi = np.cos(pulse.phi), np.sin(pulse.phi)
    drive = options.drive

    u = np.eye(model.dim, dtype=complex)
    for i in range(n_steps):
        local = i * tau_ns + offset
        omega = pulse.amplitude(local)
        control = Control(pulse.target, omega * cos_phi, omega * sin_phi, pulse.xi)
        h = model.rotating_hamiltonian((t_start + local) / NS_PER_US, (control,), options.frame, drive)
        u = expm(-1j * h * tau_us) @ u
    return u


def propagate_driven(
    model, seq: Sequence, options: PropagationOptions = PropagationOptions(), t0: float = 0.0
) -> np.ndarray:
    """Carrier-frame propagator of ``seq`` starting at absolute time ``t0`` (ns).

    Waits use the exact free propagator; shaped pulses use the Riemann product
    with ``options.step_density`` samples per ns; instantaneous pulses apply the
    ideal rotation on the addressed qubit.  Absolute time keeps carrier phases
    continuous across segments.
    """
    u = np.eye(model.dim, dtype=complex)
    for start, item in seq.timeline():
        t = t0 + start
        if isinstance(item, FreeEvolution):
            u = model.free_propagator(t / NS_PER_US, (t + item.duration) / NS_PER_US, options.frame) @ u
        elif item.envelope == "instantaneous":
            u = model.embed_single_qubit(item.target, item.ideal_unitary()) @ u
        else:
            u = _driven_segment(model, item, t, options) @ u
    return u


def evolve(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ rho @ dagger(u)


def riemann_convergence_order(
    model, seq: Sequence, step_density: float = 2.0, options: PropagationOptions = PropagationOptions()
) -> float:
    """log2 of the ratio of successive differences at densities d, 2d, 4d (about 1 for a first-order rule)."""
    unitaries = [propagate_driven(model, seq, options.with_density(step_density * k)) for k in (1, 2, 4)]
    coarse = np.linalg.norm(unitaries[0] - unitaries[1])
    fine = np.linalg.norm(unitaries[1] - unitaries[2])
    if fine == 0.0:
        return float("inf")
    return float(np.log2(coarse / fine))


@dataclass(frozen=True)
class ConvergenceCheck:
    reduced_density: float
    reference_density: float
    process_infidelity: float
    within_tolerance: bool

    def to_dict(self) -> dict:
        return {
            "reduced_density": self.reduced_density,
            "reference_density": self.reference_density,
            "process_infidelity": self.process_infidelity,
            "within_tolerance": self.within_tolerance,
        }


def convergence_check(
    model,
    seq: Sequence,
    reduced_density: float,
    reference_density: float = DEFAULT_STEP_DENSITY,
    options: PropagationOptions = PropagationOptions(),
    tolerance: float = 1e-3,
) -> ConvergenceCheck:
    """Compare one representative sequence at a reduced density with the reference density."""
    u_reduced = propagate_driven(model, seq, options.with_density(reduced_density))
    u_reference = propagate_driven(model, seq, options.with_density(reference_density))
    infidelity = 1.0 - process_fidelity(u_reference, u_reduced)
    ok = infidelity <= tolerance
    if not ok:
        logger.warning(
            "step density %.3g/ns deviates from %.3g/ns by process infidelity %.3e",
            reduced_density, reference_density, infidelity,
        )
    return ConvergenceCheck(reduced_density, reference_density, float(infidelity), ok)