"""
Magnetic-field geometry
Invert an NV's pair of ODMR transitions to the field magnitude and polar angle,
recover the azimuth from a second NV's misalignment, and bound the NV-NV
distance from the dipolar coupling.
"""
from dataclasses import dataclass, field
import logging
from typing import Optional, Tuple

import numpy as np
from scipy import constants
from scipy.optimize import brentq

from nvregsim.core.algebra import spin1_operators
from nvregsim.core.errors import GeometryError, InconsistentGeometryError, UnphysicalTransitionsError

logger = logging.getLogger(__name__)

GAMMA_E_MHZ_PER_G = -2.8024
TETRAHEDRAL_BETA = float(np.degrees(np.arccos(1.0 / 3.0)))
CROSS_CHECK_TOLERANCE_MHZ = 0.1


@dataclass(frozen=True)
class FieldGeometry:
    """Field magnitude and orientation relative to the reference NV's axis.

    ``theta`` lists the polar angle per NV (NV1, NV2); ``phi`` is the azimuth of
    the field in the reference NV frame, whose x-axis lies in the plane of both
    NV axes.  ``b_mag_per_nv`` optionally overrides the magnitude seen by each
    NV.
    """

    b_mag: float
    theta: Tuple[float, float]
    phi: float = 0.0
    beta: float = TETRAHEDRAL_BETA
    reference_nv: int = 1
    b_mag_per_nv: Optional[Tuple[float, float]] = None
    gamma_e: float = GAMMA_E_MHZ_PER_G

    def __post_init__(self):
        if self.b_mag < 0:
            raise GeometryError(f"field magnitude must be non-negative, got {self.b_mag}")
        if self.reference_nv not in (1, 2):
            raise GeometryError(f"reference_nv must be 1 or 2, got {self.reference_nv}")
        for angle in self.theta:
            if not 0.0 <= angle < 180.0:
                raise GeometryError(f"theta {angle} outside [0, 180)")

    @property
    def omega_e(self) -> float:
        return abs(self.gamma_e) * self.b_mag

    def magnitude_for(self, nv: int) -> float:
        if self.b_mag_per_nv is not None:
            return self.b_mag_per_nv[nv - 1]
        return self.b_mag

    def reference_field(self) -> np.ndarray:
        """Field vector (G) in the reference NV's frame."""
        theta = np.radians(self.theta[self.reference_nv - 1])
        phi = np.radians(self.phi)
        return self.b_mag * np.array(
            [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
        )


@dataclass(frozen=True)
class FieldSolution:
    omega_e: float
    theta: float
    theta_alt: float
    method: str = "closed-form"
    radicand: float = field(default=0.0, repr=False)

    @property
    def b_mag(self) -> float:
        return self.omega_e / abs(GAMMA_E_MHZ_PER_G)


@dataclass(frozen=True)
class AzimuthSolution:
    phi: float
    phi_alt: float
    ambiguous_sign: bool = True


def electron_hamiltonian(omega_e: float, theta: float, phi: float, d: float, e: float = 0.0) -> np.ndarray:
    """Electron-only spin Hamiltonian in cyclic MHz; angles in degrees."""
    sx, sy, sz = spin1_operators()
    th, ph = np.radians(theta), np.radians(phi)
    return (
        d * sz @ sz
        + e * (sx @ sx - sy @ sy)
        + omega_e * (np.sin(th) * np.cos(ph) * sx + np.sin(th) * np.sin(ph) * sy + np.cos(th) * sz)
    )


def forward_transitions(omega_e: float, theta: float, phi: float, d: float, e: float = 0.0) -> Tuple[float, float]:
    if omega_e < 0:
        raise GeometryError(f"omega_e must be non-negative, got {omega_e}")
    values, vectors = np.linalg.eigh(electron_hamiltonian(omega_e, theta, phi, d, e))
    ground = int(np.argmax(np.abs(vectors[1, :]) ** 2))
    excited = sorted(values[i] - values[ground] for i in range(3) if i != ground)
    return float(excited[0]), float(excited[1])


def _closed_form(nu1: float, nu2: float, d: float, e: float, phi: float) -> Tuple[float, float, float]:
    radicand = (nu1**2 + nu2**2 - nu1 * nu2 - d**2) / 3.0 - e**2
    if radicand <= 0:
        raise UnphysicalTransitionsError(
            f"no real field reproduces ({nu1}, {nu2}) MHz at D={d}, E={e}", radicand
        )
    omega_e = np.sqrt(radicand)

    s = nu1 + nu2
    spread = nu1**2 + nu2**2 - nu1 * nu2
    h = (
        7 * d**3
        + 2 * s * (2 * (nu1**2 + nu2**2) - 5 * nu1 * nu2 - 9 * e**2)
        - 3 * d * (spread + 9 * e**2)
    ) / (9 * (spread - d**2 - 3 * e**2))
    c2phi = np.cos(2 * np.radians(phi))
    cos2theta = (h - e * c2phi) / (d - e * c2phi)
    theta = 0.5 * np.degrees(np.arccos(np.clip(cos2theta, -1.0, 1.0)))
    return float(omega_e), float(theta), float(radicand)


def solve_field_from_odmr(nu1: float, nu2: float, d: float, e: float = 0.0, phi: float = 0.0) -> FieldSolution:
    """Field magnitude (as omega_e, cyclic MHz) and polar angle from one NV's transitions.

    The closed form is checked against the forward eigen-solver; if they
    disagree by more than 0.1 MHz the polar angle is re-solved numerically.
    """
    if nu1 > nu2:
        nu1, nu2 = nu2, nu1
    omega_e, theta, radicand = _closed_form(nu1, nu2, d, e, phi)

    method = "closed-form"
    if max(abs(a - b) for a, b in zip(forward_transitions(omega_e, theta, phi, d, e), (nu1, nu2))) > CROSS_CHECK_TOLERANCE_MHZ:
        logger.debug("closed-form angle disagrees with eigen-solver, re-solving numerically")

        def split_error(angle: float) -> float:
            lo, hi = forward_transitions(omega_e, angle, phi, d, e)
            return (hi - lo) - (nu2 - nu1)

        try:
            theta = float(brentq(split_error, 0.0, 90.0, xtol=1e-10))
        except ValueError as exc:
            raise GeometryError(f"no polar angle reproduces ({nu1}, {nu2}) MHz") from exc
        method = "numeric"

    return FieldSolution(omega_e=omega_e, theta=theta, theta_alt=180.0 - theta, method=method, radicand=radicand)


def solve_second_angle(theta: float, theta_b: float, beta: float = TETRAHEDRAL_BETA) -> AzimuthSolution:
    """Azimuth phi of the field from the second NV's polar angle ``theta_b``.

    Uses cos(theta_b) = cos(phi) sin(theta) sin(beta) + cos(theta) cos(beta);
    phi is only defined up to sign, the non-negative branch is returned.
    """
    th, tb, be = (np.radians(x) for x in (theta, theta_b, beta))
    denominator = np.sin(th) * np.sin(be)
    if abs(denominator) < 1e-12:
        raise InconsistentGeometryError(
            f"azimuth undefined for theta={theta}, beta={beta} (field on the reference axis)"
        )
    cos_phi = (np.cos(tb) - np.cos(th) * np.cos(be)) / denominator
    if abs(cos_phi) > 1.0 + 1e-9:
        raise InconsistentGeometryError(
            f"angles theta={theta}, theta_b={theta_b}, beta={beta} admit no azimuth",
            {"cos_phi": float(cos_phi)},
        )
    phi = float(np.degrees(np.arccos(np.clip(cos_phi, -1.0, 1.0))))
    return AzimuthSolution(phi=phi, phi_alt=-phi)


def polar_angle_in_second_frame(theta: float, phi: float, beta: float = TETRAHEDRAL_BETA) -> float:
    th, ph, be = (np.radians(x) for x in (theta, phi, beta))
    cos_tb = np.cos(ph) * np.sin(th) * np.sin(be) + np.cos(th) * np.cos(be)
    return float(np.degrees(np.arccos(np.clip(cos_tb, -1.0, 1.0))))


def rotate_field_to_second_frame(b_vec: np.ndarray, beta: float = TETRAHEDRAL_BETA) -> np.ndarray:
    """Express a reference-frame field in the frame of the NV tilted by ``beta`` about y."""
    be = np.radians(beta)
    bx, by, bz = b_vec
    return np.array([np.cos(be) * bx - np.sin(be) * bz, by, np.sin(be) * bx + np.cos(be) * bz])


def distance_bound(nu_dip: float) -> float:
    """Largest NV-NV distance (nm) compatible with ``nu_dip`` (cyclic MHz)."""
    if nu_dip <= 0:
        raise GeometryError(f"dipolar coupling must be positive, got {nu_dip}")
    gamma_e = constants.physical_constants["electron gyromag. ratio"][0]
    prefactor = constants.mu_0 * constants.hbar * gamma_e**2 / (4 * np.pi)
    r_cubed = 2.0 * prefactor / (2 * np.pi * nu_dip * 1e6)
    return float(np.cbrt(r_cubed) * 1e9)
