"""
Photophysics
Seven-level optical rate model of a single NV (three ground spin levels,
three excited spin levels, one singlet) with spin-selective rates
redistributed over the eigenstates of a misaligned field.  Provides the
laser pump cycle, spin-initialization fidelity, the SPAM estimate relative to
zero field and readout-contrast curves.

Rates are in MHz (1/us); durations at the interface are in ns.
"""
from dataclasses import dataclass, field
import logging
from typing import Dict, List, Optional, Sequence as SequenceType

import numpy as np
from scipy.linalg import expm

from nvregsim.core.errors import LabelingAmbiguityError, PhotophysicsError
from nvregsim.simulation.geometry import GAMMA_E_MHZ_PER_G, electron_hamiltonian
from nvregsim.simulation.hamiltonian import TWO_PI, label_eigenbasis

logger = logging.getLogger(__name__)

N_LEVELS = 7
GROUND = (0, 1, 2)
EXCITED = (3, 4, 5)
SINGLET = 6
# level order ms = 0, +1, -1; spin operators use (+1, 0, -1)
_LEVEL_FROM_BASIS = np.array([1, 0, 2])

EXCITED_ZFS_RATIO = 1.42 / 2.87
DEFAULT_LASER_NS = 3000.0
DEFAULT_WAIT_NS = 1000.0
READOUT_WINDOW_NS = 330.0
NS_PER_US = 1000.0


@dataclass(frozen=True)
class RateColumn:
    """Zero-field spin-selective rates (MHz) and the laser pump multiplier."""

    name: str
    k_radiative: float
    k_isc_zero: float
    k_isc_plus_minus: float
    k_singlet_zero: float
    k_singlet_plus_minus: float
    pump: float

    def __post_init__(self):
        values = (
            self.k_radiative, self.k_isc_zero, self.k_isc_plus_minus,
            self.k_singlet_zero, self.k_singlet_plus_minus, self.pump,
        )
        if any(v < 0 for v in values):
            raise PhotophysicsError(f"rate column {self.name!r} has negative entries")

    def zero_field_rates(self) -> np.ndarray:
        """k[i, j]: rate from level i to level j without pump."""
        k = np.zeros((N_LEVELS, N_LEVELS))
        for g, e in zip(GROUND, EXCITED):
            k[e, g] = self.k_radiative
        k[3, SINGLET] = self.k_isc_zero
        k[4, SINGLET] = k[5, SINGLET] = self.k_isc_plus_minus
        k[SINGLET, 0] = self.k_singlet_zero
        k[SINGLET, 1] = k[SINGLET, 2] = self.k_singlet_plus_minus
        return k

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "k_radiative": self.k_radiative,
            "k_isc_zero": self.k_isc_zero,
            "k_isc_plus_minus": self.k_isc_plus_minus,
            "k_singlet_zero": self.k_singlet_zero,
            "k_singlet_plus_minus": self.k_singlet_plus_minus,
            "pump": self.pump,
        }


RATE_COLUMNS: Dict[str, RateColumn] = {
    "gupta": RateColumn("gupta", 66.08, 11.2, 92.9, 4.9, 2.03, 1.215),
    "adapted": RateColumn("adapted", 66.08, 3.004, 90.307, 4.9, 2.03, 1.938),
}


def rate_column(name: str) -> RateColumn:
    try:
        return RATE_COLUMNS[name]
    except KeyError:
        raise PhotophysicsError(f"unknown rate column {name!r}; choose from {sorted(RATE_COLUMNS)}") from None


def spin_mixing(b_gauss: float, theta: float, d: float) -> np.ndarray:
    """M[i, p] = |<eigenstate i | ms level p>|^2 in level order (0, +1, -1)."""
    if b_gauss < 0:
        raise PhotophysicsError(f"field magnitude must be non-negative, got {b_gauss}")
    if b_gauss == 0.0:
        return np.eye(3)
    omega_e = abs(GAMMA_E_MHZ_PER_G) * b_gauss
    h = electron_hamiltonian(omega_e, theta, 0.0, d)
    try:
        _, vectors = label_eigenbasis(TWO_PI * h)
    except LabelingAmbiguityError:
        # degenerate ms=+-1 pair: the field has not lifted the degeneracy
        return np.eye(3)
    overlaps = np.abs(vectors.T) ** 2
    return overlaps[np.ix_(_LEVEL_FROM_BASIS, _LEVEL_FROM_BASIS)]


@dataclass(frozen=True)
class RateModel:
    column: RateColumn
    b_gauss: float
    theta: float
    d: float
    mix_excited: bool = True
    ground_mixing: np.ndarray = field(repr=False, default=None)
    excited_mixing: np.ndarray = field(repr=False, default=None)
    rates: np.ndarray = field(repr=False, default=None)

    @property
    def pump_rates(self) -> np.ndarray:
        k = np.zeros((N_LEVELS, N_LEVELS))
        k[np.ix_(GROUND, EXCITED)] = self.column.pump * self.rates[np.ix_(EXCITED, GROUND)].T
        return k

    def generator(self, laser: bool) -> np.ndarray:
        """dp/dt = G p (per us)."""
        k = self.rates + (self.pump_rates if laser else 0.0)
        g = k.T.copy()
        np.fill_diagonal(g, 0.0)
        g -= np.diag(k.sum(axis=1) - np.diag(k))
        return g

    def radiative_rates(self) -> np.ndarray:
        """Total photon emission rate out of each level."""
        out = np.zeros(N_LEVELS)
        out[list(EXCITED)] = self.rates[np.ix_(EXCITED, GROUND)].sum(axis=1)
        return out

    def to_dict(self) -> dict:
        return {
            "column": self.column.to_dict(),
            "b_gauss": self.b_gauss,
            "theta_deg": self.theta,
            "d_mhz": self.d,
            "mix_excited": self.mix_excited,
            "ground_mixing": self.ground_mixing.tolist(),
        }


def build_rate_model(
    column: RateColumn, b_gauss: float, theta: float, d: float = 2870.0, mix_excited: bool = True
) -> RateModel:
    """Redistribute the zero-field rates over the misaligned-field eigenstates.

    Triplet-to-triplet rates use k~_ij = sum_pq M_ip M'_jq k_pq; channels into
    or out of the singlet use the overlap of the triplet side only.  The
    excited manifold uses the ground-state D scaled by 1.42/2.87.
    """
    m_g = spin_mixing(b_gauss, theta, d)
    m_e = spin_mixing(b_gauss, theta, d * EXCITED_ZFS_RATIO) if mix_excited else np.eye(3)
    k0 = column.zero_field_rates()
    k = np.zeros_like(k0)
    g, e = list(GROUND), list(EXCITED)
    k[np.ix_(e, g)] = m_e @ k0[np.ix_(e, g)] @ m_g.T
    k[e, SINGLET] = m_e @ k0[e, SINGLET]
    k[SINGLET, g] = m_g @ k0[SINGLET, g]
    if np.any(k < -1e-12):
        raise PhotophysicsError("transformed rates became negative")
    return RateModel(column, b_gauss, theta, d, mix_excited, m_g, m_e, np.clip(k, 0.0, None))


def thermal_ground() -> np.ndarray:
    p = np.zeros(N_LEVELS)
    p[list(GROUND)] = 1.0 / 3.0
    return p


def _check_populations(p: np.ndarray) -> np.ndarray:
    if abs(p.sum() - 1.0) > 1e-9:
        raise PhotophysicsError(f"population not conserved: sum = {p.sum():.12f}")
    return np.clip(p, 0.0, 1.0)


def pump_cycle(
    model: RateModel,
    laser_on: float = DEFAULT_LASER_NS,
    wait: float = DEFAULT_WAIT_NS,
    initial: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Populations after ``laser_on`` ns of pumping and ``wait`` ns in the dark."""
    if laser_on < 0 or wait < 0:
        raise PhotophysicsError(f"durations must be non-negative, got ({laser_on}, {wait})")
    p = thermal_ground() if initial is None else np.asarray(initial, dtype=float)
    if p.shape != (N_LEVELS,):
        raise PhotophysicsError(f"initial populations must have {N_LEVELS} entries")
    p = expm(model.generator(True) * laser_on / NS_PER_US) @ p
    p = expm(model.generator(False) * wait / NS_PER_US) @ p
    return _check_populations(p)


def steady_state(model: RateModel) -> np.ndarray:
    """Null vector of the pumped generator."""
    values, vectors = np.linalg.eig(model.generator(True))
    v = np.real(vectors[:, np.argmin(np.abs(values))])
    return _check_populations(v / v.sum())


def init_fidelity(populations: np.ndarray) -> float:
    """p0 / (p0 + p+1 + p-1) over the ground manifold."""
    ground = populations[list(GROUND)]
    return float(ground[0] / ground.sum())


@dataclass(frozen=True)
class SpamEstimate:
    f_init_field: float
    f_init_zero: float

    @property
    def err_spam(self) -> float:
        """Spin-mixing SPAM error: 1 - F(B)/F(0), zero for identical fields."""
        return 1.0 - self.f_init_field / self.f_init_zero

    @property
    def infidelity_ratio(self) -> float:
        """(1 - F(B)) / (1 - F(0)), one for identical fields."""
        if abs(1.0 - self.f_init_zero) < 1e-12:
            raise PhotophysicsError("zero-field initialization is perfect; infidelity ratio is undefined")
        return (1.0 - self.f_init_field) / (1.0 - self.f_init_zero)

    def to_dict(self) -> dict:
        return {
            "f_init_field": self.f_init_field,
            "f_init_zero": self.f_init_zero,
            "err_spam": self.err_spam,
            "infidelity_ratio": self.infidelity_ratio,
        }


def init_and_spam(
    model_field: RateModel,
    model_zero: RateModel,
    laser_on: float = DEFAULT_LASER_NS,
    wait: float = DEFAULT_WAIT_NS,
) -> SpamEstimate:
    if model_field.column != model_zero.column:
        raise PhotophysicsError("both models must use the same rate column")
    return SpamEstimate(
        init_fidelity(pump_cycle(model_field, laser_on, wait)),
        init_fidelity(pump_cycle(model_zero, laser_on, wait)),
    )


def mean_spam(
    b_gauss: float,
    theta: float,
    d: float = 2870.0,
    columns: SequenceType[str] = ("gupta", "adapted"),
    laser_on: float = DEFAULT_LASER_NS,
    wait: float = DEFAULT_WAIT_NS,
    mix_excited: bool = True,
) -> SpamEstimate:
    """Initialization fidelities averaged over rate columns."""
    estimates = []
    for name in columns:
        column = rate_column(name)
        estimates.append(
            init_and_spam(
                build_rate_model(column, b_gauss, theta, d, mix_excited),
                build_rate_model(column, 0.0, theta, d, mix_excited),
                laser_on, wait,
            )
        )
    return SpamEstimate(
        float(np.mean([e.f_init_field for e in estimates])),
        float(np.mean([e.f_init_zero for e in estimates])),
    )


# ============================
# READOUT CONTRAST
# ============================

def fluorescence(model: RateModel, initial: np.ndarray, window: float = READOUT_WINDOW_NS) -> float:
    """Photons emitted (per unit detection efficiency) during ``window`` ns of laser."""
    g = np.zeros((N_LEVELS + 1, N_LEVELS + 1))
    g[:N_LEVELS, :N_LEVELS] = model.generator(True)
    g[N_LEVELS, :N_LEVELS] = model.radiative_rates()
    p = np.concatenate((initial, [0.0]))
    return float((expm(g * window / NS_PER_US) @ p)[N_LEVELS])


def readout_contrast(model: RateModel, window: float = READOUT_WINDOW_NS) -> float:
    """1 - (F+1 + F-1) / (2 F0) for cycles starting in each ground eigenstate."""
    counts = []
    for level in GROUND:
        p = np.zeros(N_LEVELS)
        p[level] = 1.0
        counts.append(fluorescence(model, p, window))
    f0, f_plus, f_minus = counts
    if f0 <= 0:
        raise PhotophysicsError("no fluorescence from the ms=0 level")
    return 1.0 - (f_plus + f_minus) / (2.0 * f0)


@dataclass(frozen=True)
class ContrastPoint:
    b_gauss: float
    contrast: float
    reference: float

    @property
    def ratio(self) -> float:
        return self.contrast / self.reference

    def to_dict(self) -> dict:
        return {"b_gauss": self.b_gauss, "contrast": self.contrast, "aligned_contrast": self.reference, "ratio": self.ratio}


def relative_contrast(
    column: RateColumn,
    b_values: SequenceType[float],
    theta: float,
    d: float = 2870.0,
    theta_reference: float = 0.0,
    window: float = READOUT_WINDOW_NS,
    mix_excited: bool = True,
) -> List[ContrastPoint]:
    """Contrast of the misaligned NV relative to an NV at ``theta_reference`` in the same field magnitude."""
    points = []
    for b in b_values:
        c = readout_contrast(build_rate_model(column, float(b), theta, d, mix_excited), window)
        ref = readout_contrast(build_rate_model(column, float(b), theta_reference, d, mix_excited), window)
        if ref <= 0:
            raise PhotophysicsError(f"aligned contrast vanished at {b} G")
        points.append(ContrastPoint(float(b), c, ref))
    logger.debug("relative contrast (%s, theta=%.2f): %s", column.name, theta, [round(p.ratio, 4) for p in points])
    return points
