"""
Register Hamiltonians
Single-NV electron/nitrogen Hamiltonians, the frame rotation of the tilted NV,
the two-NV register in the electron eigenbasis with its secular dipolar
coupling, microwave control terms and the reduced four-level model.

Boundary values are cyclic MHz; every matrix built here is angular (rad/us).
"""
from dataclasses import dataclass, field, replace
from functools import cached_property
import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.optimize import linear_sum_assignment

from nvregsim.core.algebra import BasisTag, Slot, dagger, embed_operator, kron_all, spin1_operators
from nvregsim.core.errors import (
    AlgebraError,
    ConfigValidationError,
    InconsistentGeometryError,
    LabelingAmbiguityError,
)
from nvregsim.simulation.geometry import FieldGeometry, rotate_field_to_second_frame
from nvregsim.simulation.readout import ReadoutLayout, electron_state, spin_init_state

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
DEGENERACY_THRESHOLD_MHZ = 0.1
THETA_TOLERANCE_DEG = 0.5

SX, SY, SZ = spin1_operators()
I3 = np.eye(3, dtype=complex)


@dataclass(frozen=True)
class NvParameters:
    """Per-NV constants in cyclic MHz (gyromagnetic ratios in MHz/G)."""

    d: float
    e: float = 0.0
    q: float = -4.945
    a_diag: Tuple[float, float, float] = (-2.62, -2.62, -2.162)
    gamma_e: float = -2.8024
    gamma_n: float = 0.0003077
    contrast_alpha: float = 0.15

    def __post_init__(self):
        if len(self.a_diag) != 3:
            raise ConfigValidationError("hyperfine tensor needs three diagonal entries")
        if abs(self.a_diag[0] - self.a_diag[1]) > 1e-12:
            raise ConfigValidationError(f"hyperfine tensor must be axial (Axx == Ayy), got {self.a_diag}")
        if not 0.0 < self.contrast_alpha < 1.0:
            raise ConfigValidationError(f"contrast_alpha {self.contrast_alpha} outside (0, 1)")

    @property
    def gamma_ratio(self) -> float:
        """Nuclear drive strength relative to the electron drive."""
        return self.gamma_n / self.gamma_e

    def without_hyperfine(self) -> "NvParameters":
        return replace(self, a_diag=(0.0, 0.0, 0.0))


def _nv_axes(beta: float) -> np.ndarray:
    """Rows are the local x', y', z' axes of an NV tilted by ``beta`` about y."""
    be = np.radians(beta)
    return np.array([[np.cos(be), 0.0, -np.sin(be)], [0.0, 1.0, 0.0], [np.sin(be), 0.0, np.cos(be)]])


def _nv_hamiltonian(params: NvParameters, b_vec: Sequence[float], axes: np.ndarray) -> np.ndarray:
    s_lab = [np.kron(op, I3) for op in (SX, SY, SZ)]
    i_lab = [np.kron(I3, op) for op in (SX, SY, SZ)]
    s_loc = [sum(axes[k, j] * s_lab[j] for j in range(3)) for k in range(3)]
    i_loc = [sum(axes[k, j] * i_lab[j] for j in range(3)) for k in range(3)]

    b_vec = np.asarray(b_vec, dtype=float)
    omega_e = -params.gamma_e * b_vec
    omega_n = -params.gamma_n * b_vec

    h = params.d * s_loc[2] @ s_loc[2]
    h = h + params.e * (s_loc[0] @ s_loc[0] - s_loc[1] @ s_loc[1])
    h = h + sum(omega_e[j] * s_lab[j] for j in range(3))
    h = h - params.q * i_loc[2] @ i_loc[2]
    h = h + sum(omega_n[j] * i_lab[j] for j in range(3))
    h = h - sum(params.a_diag[k] * s_loc[k] @ i_loc[k] for k in range(3))
    return TWO_PI * h


def build_single_nv(params: NvParameters, b_vec: Sequence[float]) -> np.ndarray:
    """Electron plus nitrogen Hamiltonian (nv-9) with the field given in the NV's own frame."""
    return _nv_hamiltonian(params, b_vec, np.eye(3))


def build_tilted_nv(params: NvParameters, b_vec: Sequence[float], beta: float) -> np.ndarray:
    """nv-9 Hamiltonian of an NV tilted by ``beta``, written in the reference frame."""
    return _nv_hamiltonian(params, b_vec, _nv_axes(beta))


def electron_only(params: NvParameters, b_vec: Sequence[float]) -> np.ndarray:
    b_vec = np.asarray(b_vec, dtype=float)
    omega_e = -params.gamma_e * b_vec
    h = params.d * SZ @ SZ + params.e * (SX @ SX - SY @ SY)
    h = h + omega_e[0] * SX + omega_e[1] * SY + omega_e[2] * SZ
    return TWO_PI * h


def rotate_nv1_frame(op: np.ndarray, beta: float, layout: BasisTag | str = BasisTag.NV, nv: int = 1) -> np.ndarray:
    """Rotate an NV's spin operators by -beta about y so its axis becomes z.

    Applies V op V† with V = exp(i beta S_y) on the electron and nuclear spin of
    the chosen NV.
    """
    layout = BasisTag(layout)
    be = np.radians(beta)
    v_spin = expm(1j * be * SY)
    if layout is BasisTag.SINGLE_SPIN:
        v = v_spin
    elif layout is BasisTag.NV:
        v = np.kron(v_spin, v_spin)
    elif layout is BasisTag.PAIR:
        electron, nuclear = (
            (Slot.NV1_ELECTRON, Slot.NV1_NUCLEAR) if nv == 1 else (Slot.NV2_ELECTRON, Slot.NV2_NUCLEAR)
        )
        v = embed_operator(v_spin, electron, layout) @ embed_operator(v_spin, nuclear, layout)
    else:
        raise AlgebraError(f"frame rotation is not defined for layout {layout.value}")
    if op.shape != v.shape:
        raise AlgebraError(f"operator of shape {op.shape} does not match layout {layout.value}")
    return v @ op @ dagger(v)


def label_eigenbasis(h_electron: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvectors of a 3x3 electron Hamiltonian, column k most like basis state k.

    Returns (energies, T) with T unitary and each column's dominant component
    real and positive.
    """
    values, vectors = np.linalg.eigh(h_electron)
    gaps = np.diff(values) / TWO_PI
    if np.any(gaps < DEGENERACY_THRESHOLD_MHZ):
        raise LabelingAmbiguityError(
            f"electron levels closer than {DEGENERACY_THRESHOLD_MHZ} MHz; labels are ambiguous",
            {"gaps_mhz": gaps.tolist()},
        )
    rows, cols = linear_sum_assignment(-np.abs(vectors) ** 2)
    order = np.empty(3, dtype=int)
    order[rows] = cols
    vectors = vectors[:, order]
    values = values[order]
    for k in range(3):
        dominant = vectors[np.argmax(np.abs(vectors[:, k])), k]
        vectors[:, k] *= np.conj(dominant) / abs(dominant)
    return values, vectors


# ============================
# PAIR REGISTER
# ============================

@dataclass(frozen=True)
class DriveOptions:
    crosstalk: bool = True
    drive_nuclear: bool = True


@dataclass(frozen=True)
class Control:
    """Drive applied on one carrier: angular amplitudes and carrier phase."""

    nv: int
    omega_x: float
    omega_y: float = 0.0
    xi: float = 0.0


def _nuclear_state(nuclear: str) -> np.ndarray:
    """Nitrogen state: maximally mixed, or polarized into mI = 0."""
    if nuclear == "mixed":
        return I3 / 3.0
    if nuclear == "polarized":
        return np.diag([0.0, 1.0, 0.0]).astype(complex)
    raise ConfigValidationError(f"unknown nuclear initial state {nuclear!r}")


def _electrons_to_register(op_e: np.ndarray, op_n: Optional[np.ndarray] = None) -> np.ndarray:
    """Lift a 9x9 electron-pair operator to the register ordering e1 n1 e2 n2."""
    op_n = np.eye(9, dtype=complex) if op_n is None else op_n
    full = np.kron(op_e, op_n).reshape((3, 3, 3, 3) * 2)
    # axes currently (e1, e2, n1, n2 | e1', e2', n1', n2')
    full = full.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    return full.reshape(81, 81)


@dataclass(frozen=True, eq=False)
class PairModel:
    nv1: NvParameters
    nv2: NvParameters
    geometry: FieldGeometry
    nu_dip: float
    qubit_basis: Tuple[str, str]
    carriers: Tuple[float, float]
    h_free: np.ndarray = field(repr=False)
    transform: np.ndarray = field(repr=False)
    electron_energies: Tuple[np.ndarray, np.ndarray] = field(repr=False)
    electron_transforms: Tuple[np.ndarray, np.ndarray] = field(repr=False)
    excited_index: Tuple[int, int] = (0, 0)

    electron_dims = (3, 3)
    nuclear_dims = (3, 3)
    dim = 81

    # ---- register description ----

    @property
    def g(self) -> float:
        return TWO_PI * self.nu_dip

    @property
    def qubit_levels(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        return (1, self.excited_index[0]), (1, self.excited_index[1])

    @property
    def signs(self) -> Tuple[int, int]:
        """Sz label of each NV's excited qubit level."""
        return tuple(1 if idx == 0 else -1 for idx in self.excited_index)

    @property
    def contrasts(self) -> Tuple[float, float]:
        return self.nv1.contrast_alpha, self.nv2.contrast_alpha

    @property
    def readout_layout(self) -> ReadoutLayout:
        return ReadoutLayout(self.electron_dims, self.nuclear_dims, self.qubit_levels)

    @property
    def carrier_angular(self) -> Tuple[float, float]:
        return TWO_PI * self.carriers[0], TWO_PI * self.carriers[1]

    def transition_frequencies(self) -> Tuple[float, float]:
        """Electron qubit transitions (cyclic MHz) of each NV."""
        out = []
        for energies, idx in zip(self.electron_energies, self.excited_index):
            out.append(float((energies[idx] - energies[1]) / TWO_PI))
        return tuple(out)

    @cached_property
    def frame_diag(self) -> np.ndarray:
        sz2 = np.diag(SZ @ SZ).real
        w1, w2 = self.carrier_angular
        ones = np.ones(3)
        return w1 * kron_all([sz2, ones, ones, ones]) + w2 * kron_all([ones, ones, sz2, ones])

    @cached_property
    def frequency_matrix(self) -> np.ndarray:
        w = self.frame_diag
        return w[:, None] - w[None, :]

    @cached_property
    def qubit_projectors(self) -> Dict[str, np.ndarray]:
        """Rank-1 projectors on the electron-pair space for |00>, |01>, |10>, |11>."""
        (g1, e1), (g2, e2) = self.qubit_levels
        out = {}
        for label, (a, b) in zip(("00", "01", "10", "11"), ((g1, g2), (g1, e2), (e1, g2), (e1, e2))):
            proj = np.zeros((9, 9), dtype=complex)
            proj[3 * a + b, 3 * a + b] = 1.0
            out[label] = proj
        return out

    # ---- rebuilt variants ----

    def with_hyperfine(self, enabled: bool) -> "PairModel":
        if enabled:
            return self
        return build_pair_model(
            self.nv1.without_hyperfine(), self.nv2.without_hyperfine(), self.geometry, self.nu_dip,
            self.qubit_basis, self.carriers,
        )

    def with_coupling(self, nu_dip: float) -> "PairModel":
        if nu_dip == self.nu_dip:
            return self
        return build_pair_model(self.nv1, self.nv2, self.geometry, nu_dip, self.qubit_basis, self.carriers)

    # ---- states and ideal operations ----

    def initial_state(self, f_init: Tuple[float, float] = (1.0, 1.0), nuclear: str = "mixed") -> np.ndarray:
        rho_n = _nuclear_state(nuclear)
        return kron_all([spin_init_state(f_init[0]), rho_n, spin_init_state(f_init[1]), rho_n])

    def embed_single_qubit(self, nv: int, u2: np.ndarray) -> np.ndarray:
        """Lift a 2x2 (ground, excited) unitary on one NV to the register."""
        g, e = self.qubit_levels[nv - 1]
        u3 = I3.copy()
        u3[np.ix_([g, e], [g, e])] = u2
        slot = Slot.NV1_ELECTRON if nv == 1 else Slot.NV2_ELECTRON
        return embed_operator(u3, slot, BasisTag.PAIR)

    @property
    def qubit_index(self) -> list:
        """Electron-pair indices of |00>, |01>, |10>, |11>."""
        (g1, e1), (g2, e2) = self.qubit_levels
        return [3 * a + b for a in (g1, e1) for b in (g2, e2)]

    def embed_qubit_unitary(self, u4: np.ndarray) -> np.ndarray:
        """Lift a two-qubit unitary in standard |q1 q2> order to the register."""
        u9 = np.eye(9, dtype=complex)
        u9[np.ix_(self.qubit_index, self.qubit_index)] = u4
        return _electrons_to_register(u9)

    def embed_qubit_state(self, rho4: np.ndarray, nuclear: str = "mixed") -> np.ndarray:
        rho9 = np.zeros((9, 9), dtype=complex)
        rho9[np.ix_(self.qubit_index, self.qubit_index)] = rho4
        rho_n = _nuclear_state(nuclear)
        return _electrons_to_register(rho9, np.kron(rho_n, rho_n))

    def qubit_block(self, rho: np.ndarray) -> np.ndarray:
        """Nuclear-traced state restricted to the qubit subspace (trace drops with leakage)."""
        rho_e = electron_state(rho, self.readout_layout)
        return rho_e[np.ix_(self.qubit_index, self.qubit_index)]

    # ---- control terms ----

    @cached_property
    def _electron_drive(self) -> Tuple[np.ndarray, np.ndarray]:
        """T† Sx T per NV on the register."""
        t1, t2 = self.electron_transforms
        return (
            embed_operator(dagger(t1) @ SX @ t1, Slot.NV1_ELECTRON),
            embed_operator(dagger(t2) @ SX @ t2, Slot.NV2_ELECTRON),
        )

    @cached_property
    def _nuclear_drive(self) -> Tuple[np.ndarray, np.ndarray]:
        return (
            self.nv1.gamma_ratio * embed_operator(SX, Slot.NV1_NUCLEAR),
            self.nv2.gamma_ratio * embed_operator(SX, Slot.NV2_NUCLEAR),
        )

    def _qubit_block_projector(self, nv: int) -> np.ndarray:
        g, e = self.qubit_levels[nv - 1]
        p3 = np.zeros((3, 3), dtype=complex)
        p3[g, g] = p3[e, e] = 1.0
        return embed_operator(p3, Slot.NV1_ELECTRON if nv == 1 else Slot.NV2_ELECTRON)

    def drive_operator(self, nv: int, options: DriveOptions = DriveOptions()) -> np.ndarray:
        """Operator multiplying the sqrt(2)[Ox cos + Oy sin] control field of carrier ``nv``."""
        if not options.crosstalk:
            proj = self._qubit_block_projector(nv)
            return proj @ self._electron_drive[nv - 1] @ proj
        op = self._electron_drive[0] + self._electron_drive[1]
        if options.drive_nuclear:
            op = op + self._nuclear_drive[0] + self._nuclear_drive[1]
        return op

    @cached_property
    def _rwa_cut(self) -> float:
        return 0.5 * min(self.carrier_angular)

    @cached_property
    def static_rwa(self) -> np.ndarray:
        h = self.h_free - np.diag(self.frame_diag)
        return np.where(np.abs(self.frequency_matrix) < 1e-9, h, 0.0)

    def _rwa_parts(self, nv: int, options: DriveOptions):
        key = (nv, options)
        cache = self.__dict__.setdefault("_rwa_cache", {})
        if key not in cache:
            x = self.drive_operator(nv, options)
            omega = self.carrier_angular[nv - 1]
            f_plus = self.frequency_matrix + omega
            f_minus = self.frequency_matrix - omega
            keep_plus = np.abs(f_plus) < self._rwa_cut
            keep_minus = np.abs(f_minus) < self._rwa_cut
            cache[key] = (
                np.where(keep_plus, x, 0.0), np.where(keep_plus, f_plus, 0.0),
                np.where(keep_minus, x, 0.0), np.where(keep_minus, f_minus, 0.0),
            )
        return cache[key]

    def rotating_hamiltonian(
        self, t: float, controls: Sequence[Control] = (), frame: str = "lab", options: DriveOptions = DriveOptions()
    ) -> np.ndarray:
        """H in the carrier frame at time ``t`` (us).

        ``lab`` keeps every term of the full Hamiltonian, oscillating at the frame
        frequencies; ``rwa`` keeps only near-resonant terms (crosstalk included).
        """
        if frame == "lab":
            phases = np.exp(1j * self.frequency_matrix * t)
            h = self.h_free - np.diag(self.frame_diag)
            for c in controls:
                w = self.carrier_angular[c.nv - 1]
                amp = np.sqrt(2.0) * (c.omega_x * np.cos(w * t + c.xi) + c.omega_y * np.sin(w * t + c.xi))
                h = h + amp * self.drive_operator(c.nv, options)
            return h * phases
        if frame != "rwa":
            raise ConfigValidationError(f"unknown propagation frame {frame!r}")
        h = self.static_rwa.astype(complex)
        for c in controls:
            x_plus, f_plus, x_minus, f_minus = self._rwa_parts(c.nv, options)
            up = x_plus * np.exp(1j * (f_plus * t + c.xi))
            down = x_minus * np.exp(1j * (f_minus * t - c.xi))
            scale = np.sqrt(2.0) / 2.0
            h = h + scale * (c.omega_x * (up + down) - 1j * c.omega_y * (up - down))
        return h

    @cached_property
    def _free_eigensystem(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.h_free)

    @cached_property
    def _static_rwa_eigensystem(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.static_rwa)

    def free_propagator(self, t0: float, t1: float, frame: str = "lab") -> np.ndarray:
        """Exact carrier-frame propagator between ``t0`` and ``t1`` (us) without drive."""
        if frame == "rwa":
            values, vectors = self._static_rwa_eigensystem
            return (vectors * np.exp(-1j * values * (t1 - t0))) @ dagger(vectors)
        values, vectors = self._free_eigensystem
        lab = (vectors * np.exp(-1j * values * (t1 - t0))) @ dagger(vectors)
        w = self.frame_diag
        return np.exp(1j * w * t1)[:, None] * lab * np.exp(-1j * w * t0)[None, :]


def microwave_hamiltonian(
    model: PairModel, controls: Sequence[Control], t: float, options: DriveOptions = DriveOptions()
) -> np.ndarray:
    """Lab-frame control Hamiltonian (register eigenbasis) at time ``t`` (us)."""
    h = np.zeros((model.dim, model.dim), dtype=complex)
    for c in controls:
        w = model.carrier_angular[c.nv - 1]
        amp = np.sqrt(2.0) * (c.omega_x * np.cos(w * t + c.xi) + c.omega_y * np.sin(w * t + c.xi))
        if amp != 0.0:
            h = h + amp * model.drive_operator(c.nv, options)
    return h


def _local_fields(geometry: FieldGeometry) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(field per NV in its own frame, reference-frame field seen by the tilted NV)."""
    direction = geometry.reference_field()
    norm = np.linalg.norm(direction)
    unit = direction / norm if norm > 0 else direction
    ref = geometry.reference_nv
    other = 3 - ref
    b_ref = unit * geometry.magnitude_for(ref)
    b_other_common = unit * geometry.magnitude_for(other)
    b_other_local = rotate_field_to_second_frame(b_other_common, geometry.beta)

    if np.linalg.norm(b_other_local) > 0:
        theta_local = float(np.degrees(np.arccos(b_other_local[2] / np.linalg.norm(b_other_local))))
        configured = geometry.theta[other - 1]
        if min(abs(theta_local - configured), abs(180.0 - theta_local - configured)) > THETA_TOLERANCE_DEG:
            raise InconsistentGeometryError(
                f"field geometry puts NV{other} at {theta_local:.2f} deg, configured {configured:.2f} deg",
                {"theta_computed": theta_local, "theta_configured": configured},
            )
    fields = {ref: b_ref, other: b_other_local}
    return fields[1], fields[2], b_other_common


def build_pair_model(
    nv1: NvParameters,
    nv2: NvParameters,
    geometry: FieldGeometry,
    nu_dip: float,
    qubit_basis: Tuple[str, str] = ("e1", "e1"),
    carriers: Optional[Tuple[float, float]] = None,
) -> PairModel:
    """Assemble the 81-level register in the labelled electron eigenbasis.

    The reference NV is built in its own frame.  The other NV is written in the
    reference frame with tilted spin axes and brought to its own frame with
    :func:`rotate_nv1_frame`.  ``carriers`` default to the electron qubit
    transitions.
    """
    for choice in qubit_basis:
        if choice not in ("e1", "e2"):
            raise ConfigValidationError(f"qubit basis must be 'e1' or 'e2', got {choice!r}")

    params = {1: nv1, 2: nv2}
    b1, b2, b_other_common = _local_fields(geometry)
    local = {1: b1, 2: b2}
    ref = geometry.reference_nv
    other = 3 - ref

    h_nv = {
        ref: build_single_nv(params[ref], local[ref]),
        other: rotate_nv1_frame(build_tilted_nv(params[other], b_other_common, geometry.beta), geometry.beta),
    }

    energies, transforms, excited = [], [], []
    for nv in (1, 2):
        values, t = label_eigenbasis(electron_only(params[nv], local[nv]))
        lower, upper = sorted((0, 2), key=lambda k: values[k])
        energies.append(values)
        transforms.append(t)
        excited.append(lower if qubit_basis[nv - 1] == "e1" else upper)

    h_sum = np.kron(h_nv[1], np.eye(9)) + np.kron(np.eye(9), h_nv[2])
    transform = kron_all([transforms[0], I3, transforms[1], I3])
    h_int = TWO_PI * nu_dip * kron_all([SZ, I3, SZ, I3])
    h_free = dagger(transform) @ h_sum @ transform + h_int
    h_free = 0.5 * (h_free + dagger(h_free))

    if carriers is None:
        carriers = tuple(
            float((energies[i][excited[i]] - energies[i][1]) / TWO_PI) for i in range(2)
        )
    logger.debug("pair model carriers %.3f / %.3f MHz, signs from levels %s", carriers[0], carriers[1], excited)

    return PairModel(
        nv1=nv1,
        nv2=nv2,
        geometry=geometry,
        nu_dip=nu_dip,
        qubit_basis=tuple(qubit_basis),
        carriers=tuple(float(c) for c in carriers),
        h_free=h_free,
        transform=transform,
        electron_energies=tuple(energies),
        electron_transforms=tuple(transforms),
        excited_index=tuple(excited),
    )


# ============================
# REDUCED FOUR-LEVEL MODEL
# ============================

def reduced_two_qubit_hamiltonian(
    delta1: float, delta2: float, g: float, omega1: complex = 0.0, omega2: complex = 0.0
) -> np.ndarray:
    """4x4 register Hamiltonian in the order (g e), (g g), (e e), (e g) of (NV1, NV2).

    ``omega`` is the complex drive Ox + i Oy of each NV; the excited-from-ground
    matrix element is omega/2.
    """
    h = np.diag([delta2, 0.0, delta1 + delta2 - g, delta1]).astype(complex)
    # NV1 flips the first slot: (g g)->(e g) and (g e)->(e e)
    for ground, excited in ((1, 3), (0, 2)):
        h[excited, ground] += omega1 / 2.0
        h[ground, excited] += np.conj(omega1) / 2.0
    # NV2 flips the second slot: (g g)->(g e) and (e g)->(e e)
    for ground, excited in ((1, 0), (3, 2)):
        h[excited, ground] += omega2 / 2.0
        h[ground, excited] += np.conj(omega2) / 2.0
    return h


@dataclass(frozen=True, eq=False)
class ReducedPairModel:
    """Four-level register already in the carrier frame; drives act on the qubit levels only."""

    nu_dip: float
    delta1: float = 0.0
    delta2: float = 0.0
    contrasts: Tuple[float, float] = (0.5, 0.5)

    electron_dims = (2, 2)
    nuclear_dims = (1, 1)
    dim = 4
    qubit_levels = ((0, 1), (1, 0))
    signs = (-1, 1)

    @property
    def g(self) -> float:
        return TWO_PI * self.nu_dip

    @property
    def readout_layout(self) -> ReadoutLayout:
        return ReadoutLayout(self.electron_dims, self.nuclear_dims, self.qubit_levels)

    @cached_property
    def h_free(self) -> np.ndarray:
        return reduced_two_qubit_hamiltonian(self.delta1, self.delta2, self.g)

    def with_coupling(self, nu_dip: float) -> "ReducedPairModel":
        return replace(self, nu_dip=nu_dip)

    def with_hyperfine(self, enabled: bool) -> "ReducedPairModel":
        return self

    def initial_state(self, f_init: Tuple[float, float] = (1.0, 1.0), nuclear: str = "mixed") -> np.ndarray:
        (g1, _), (g2, _) = self.qubit_levels
        rho1 = spin_init_state(f_init[0], dim=2, ground=g1)
        rho2 = spin_init_state(f_init[1], dim=2, ground=g2)
        return np.kron(rho1, rho2)

    def embed_single_qubit(self, nv: int, u2: np.ndarray) -> np.ndarray:
        g, e = self.qubit_levels[nv - 1]
        u = np.zeros((2, 2), dtype=complex)
        u[np.ix_([g, e], [g, e])] = u2
        return np.kron(u, np.eye(2)) if nv == 1 else np.kron(np.eye(2), u)

    @property
    def qubit_index(self) -> list:
        (g1, e1), (g2, e2) = self.qubit_levels
        return [2 * a + b for a in (g1, e1) for b in (g2, e2)]

    def embed_qubit_unitary(self, u4: np.ndarray) -> np.ndarray:
        out = np.zeros((4, 4), dtype=complex)
        out[np.ix_(self.qubit_index, self.qubit_index)] = u4
        return out

    def embed_qubit_state(self, rho4: np.ndarray, nuclear: str = "mixed") -> np.ndarray:
        return self.embed_qubit_unitary(rho4)

    def qubit_block(self, rho: np.ndarray) -> np.ndarray:
        return rho[np.ix_(self.qubit_index, self.qubit_index)]

    def rotating_hamiltonian(
        self, t: float, controls: Sequence[Control] = (), frame: str = "rwa", options: DriveOptions = DriveOptions()
    ) -> np.ndarray:
        omega1 = sum((c.omega_x + 1j * c.omega_y) * np.exp(-1j * c.xi) for c in controls if c.nv == 1)
        omega2 = sum((c.omega_x + 1j * c.omega_y) * np.exp(-1j * c.xi) for c in controls if c.nv == 2)
        return reduced_two_qubit_hamiltonian(self.delta1, self.delta2, self.g, omega1, omega2)

    def free_propagator(self, t0: float, t1: float, frame: str = "rwa") -> np.ndarray:
        return np.diag(np.exp(-1j * np.diag(self.h_free).real * (t1 - t0)))
