"""
Readout and state preparation
POVM fluorescence readout with per-NV contrast, alternating-readout
normalization, charge-state mixtures, spin-initialization SPAM and the
phenomenological decoherence multiplier.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from nvregsim.core.algebra import kron_all, partial_trace_dims
from nvregsim.core.errors import AlgebraError, ConfigValidationError

Levels = Tuple[Tuple[int, int], Tuple[int, int]]

DEFAULT_CHARGE_WEIGHTS = (0.49, 0.21, 0.21, 0.09)
CHARGE_LABELS = ("--", "-0", "0-", "00")


@dataclass(frozen=True)
class ReadoutLayout:
    """Where the qubits sit inside a register state: (ground, excited) level per NV."""

    electron_dims: Tuple[int, int]
    nuclear_dims: Tuple[int, int]
    qubit_levels: Levels

    @property
    def dim(self) -> int:
        return int(np.prod(self.electron_dims) * np.prod(self.nuclear_dims))


STANDARD_QUBIT_LAYOUT = ReadoutLayout((2, 2), (1, 1), ((0, 1), (0, 1)))


def default_layout(dim: int) -> ReadoutLayout:
    if dim == 4:
        return STANDARD_QUBIT_LAYOUT
    if dim == 9:
        return ReadoutLayout((3, 3), (1, 1), ((1, 0), (1, 0)))
    if dim == 81:
        return ReadoutLayout((3, 3), (3, 3), ((1, 0), (1, 0)))
    raise AlgebraError(f"no default readout layout for dimension {dim}")


def electron_state(rho: np.ndarray, layout: ReadoutLayout) -> np.ndarray:
    """Trace out the nuclear factors of a register state."""
    if np.prod(layout.nuclear_dims) == 1:
        return rho
    (e1, e2), (n1, n2) = layout.electron_dims, layout.nuclear_dims
    return partial_trace_dims(rho, (e1, n1, e2, n2), (0, 2))


def _validate_state(rho: np.ndarray, dim: int) -> None:
    if rho.ndim != 2 or rho.shape != (dim, dim):
        raise AlgebraError(f"state of shape {rho.shape} does not match layout dimension {dim}")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > 1e-6:
        raise AlgebraError(f"state trace {trace:.9f} deviates from 1", {"trace": trace})
    if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        raise AlgebraError("state is not Hermitian")


def _projector(dim: int, index: int) -> np.ndarray:
    proj = np.zeros((dim, dim), dtype=complex)
    proj[index, index] = 1.0
    return proj


def qubit_flip(dim: int, levels: Tuple[int, int]) -> np.ndarray:
    """Ideal pi_x on the (ground, excited) levels; spectator levels untouched."""
    flip = np.eye(dim, dtype=complex)
    g, e = levels
    flip[g, g] = flip[e, e] = 0.0
    flip[g, e] = flip[e, g] = -1j
    return flip


def povm_readout(
    rho: np.ndarray,
    alpha1: float,
    alpha2: float,
    layout: Optional[ReadoutLayout] = None,
    alternating: bool = True,
    active: Tuple[bool, bool] = (True, True),
    nv0_level: float = 1.0,
) -> float:
    """Fluorescence observable R in [-1, 1].

    With ``alternating`` the readout of the state is referenced against the
    readout after ideal pi pulses on both NVs.  An inactive (NV0) centre
    contributes the constant ``nv0_level`` in place of its ground population.
    """
    rho = np.asarray(rho, dtype=complex)
    layout = layout or default_layout(rho.shape[0])
    _validate_state(rho, layout.dim)
    if alpha1 < 0 or alpha2 < 0 or alpha1 + alpha2 <= 0:
        raise AlgebraError(f"invalid contrasts ({alpha1}, {alpha2})")

    rho_e = electron_state(rho, layout)
    d1, d2 = layout.electron_dims
    (g1, _), (g2, _) = layout.qubit_levels
    projectors = (
        np.kron(_projector(d1, g1), np.eye(d2)),
        np.kron(np.eye(d1), _projector(d2, g2)),
    )
    alphas = (alpha1, alpha2)

    def bright(state: np.ndarray) -> float:
        total = 0.0
        for alpha, proj, is_active in zip(alphas, projectors, active):
            term = np.trace(proj @ state).real if is_active else nv0_level
            total += alpha * term
        return total / (alpha1 + alpha2)

    if not alternating:
        return float(2.0 * bright(rho_e) - 1.0)
    x12 = np.kron(qubit_flip(d1, layout.qubit_levels[0]), qubit_flip(d2, layout.qubit_levels[1]))
    flipped = x12 @ rho_e @ x12.conj().T
    return float(bright(rho_e) - bright(flipped))


# ============================
# CHARGE-STATE MIXTURES
# ============================

@dataclass(frozen=True)
class ChargeConfig:
    label: str
    weight: float
    active: Tuple[bool, bool]

    @property
    def coupled(self) -> bool:
        return all(self.active)


@dataclass(frozen=True)
class ChargeMixture:
    """Probabilities of the charge configurations (NV1 NV2) in the order --, -0, 0-, 00."""

    weights: Tuple[float, float, float, float] = DEFAULT_CHARGE_WEIGHTS

    def __post_init__(self):
        if len(self.weights) != 4:
            raise ConfigValidationError(f"charge mixture needs 4 weights, got {len(self.weights)}")
        if any(w < -1e-12 or w > 1 + 1e-12 for w in self.weights):
            raise ConfigValidationError(f"charge weights {self.weights} outside [0, 1]")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ConfigValidationError(f"charge weights {self.weights} do not sum to 1")

    @classmethod
    def pure(cls) -> "ChargeMixture":
        return cls((1.0, 0.0, 0.0, 0.0))

    @classmethod
    def independent(cls, p_minus: float) -> "ChargeMixture":
        q = 1.0 - p_minus
        return cls((p_minus * p_minus, p_minus * q, q * p_minus, q * q))

    @property
    def configs(self) -> List[ChargeConfig]:
        actives = ((True, True), (True, False), (False, True), (False, False))
        return [ChargeConfig(label, w, a) for label, w, a in zip(CHARGE_LABELS, self.weights, actives)]


def charge_mixture_signal(per_config_signals: Sequence[float], weights: ChargeMixture) -> float:
    signals = np.asarray(per_config_signals, dtype=float)
    if signals.shape != (4,):
        raise ConfigValidationError(f"expected 4 per-configuration signals, got {signals.shape}")
    return float(np.dot(weights.weights, signals))


# ============================
# DECOHERENCE AND SPIN INITIALIZATION
# ============================

def mean_t2(t2_nv1: float, t2_nv2: float) -> float:
    if t2_nv1 <= 0 or t2_nv2 <= 0:
        raise ConfigValidationError(f"T2 values must be positive, got ({t2_nv1}, {t2_nv2})")
    return 0.5 * (t2_nv1 + t2_nv2)


def apply_decoherence(value: float, t_us: float, t2_nv1: float, t2_nv2: float) -> float:
    """Multiply by exp(-t / mean T2)."""
    return float(value * np.exp(-t_us / mean_t2(t2_nv1, t2_nv2)))


def fidelity_with_decoherence(f_coherent: float, epg_t2: float) -> float:
    return float(f_coherent * (1.0 - epg_t2))


def spin_init_state(f_init: float, dim: int = 3, ground: int = 1) -> np.ndarray:
    """Imperfectly initialized electron: f_init in the ground level, the rest spread over the others."""
    floor = 1.0 / dim
    if not floor - 1e-12 <= f_init <= 1.0 + 1e-12:
        raise ConfigValidationError(f"initialization fidelity {f_init} outside [{floor:.4f}, 1]")
    populations = np.full(dim, (1.0 - f_init) / (dim - 1))
    populations[ground] = f_init
    return np.diag(populations).astype(complex)


def product_density(factors: Sequence[np.ndarray]) -> np.ndarray:
    return kron_all([np.asarray(f, dtype=complex) for f in factors])
