"""
Spin algebra
Spin-1 operators, tensor-product embedding and partial traces over the
canonical register layout NV1-electron ⊗ NV1-nuclear ⊗ NV2-electron ⊗ NV2-nuclear.

Operators are plain complex ``numpy`` arrays; the tensor layout travels with
them as a :class:`BasisTag` wherever it is ambiguous.  Spin-1 bases are ordered
(+1, 0, -1) for both electron and nuclear spins.
"""
from enum import Enum
from functools import reduce
from typing import Sequence, Tuple

import numpy as np

from nvregsim.core.errors import AlgebraError

HERMITIAN_RTOL = 1e-12
UNITARY_ATOL = 1e-9


class BasisTag(str, Enum):
    SINGLE_SPIN = "single-spin-3"
    NV = "nv-9"
    ELECTRONS = "electrons-9"
    PAIR = "pair-81"
    QUBIT_PAIR = "qubitpair-4"

    @property
    def dims(self) -> Tuple[int, ...]:
        return _LAYOUT_DIMS[self]

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))


_LAYOUT_DIMS = {
    BasisTag.SINGLE_SPIN: (3,),
    BasisTag.NV: (3, 3),
    BasisTag.ELECTRONS: (3, 3),
    BasisTag.PAIR: (3, 3, 3, 3),
    BasisTag.QUBIT_PAIR: (2, 2),
}


class Slot(str, Enum):
    NV1_ELECTRON = "nv1-electron"
    NV1_NUCLEAR = "nv1-nuclear"
    NV2_ELECTRON = "nv2-electron"
    NV2_NUCLEAR = "nv2-nuclear"


# slot -> tensor position, per layout
_SLOT_POSITIONS = {
    BasisTag.PAIR: {Slot.NV1_ELECTRON: 0, Slot.NV1_NUCLEAR: 1, Slot.NV2_ELECTRON: 2, Slot.NV2_NUCLEAR: 3},
    BasisTag.NV: {Slot.NV1_ELECTRON: 0, Slot.NV1_NUCLEAR: 1, Slot.NV2_ELECTRON: 0, Slot.NV2_NUCLEAR: 1},
    BasisTag.ELECTRONS: {Slot.NV1_ELECTRON: 0, Slot.NV2_ELECTRON: 1},
    BasisTag.QUBIT_PAIR: {Slot.NV1_ELECTRON: 0, Slot.NV2_ELECTRON: 1},
    BasisTag.SINGLE_SPIN: {Slot.NV1_ELECTRON: 0, Slot.NV1_NUCLEAR: 0, Slot.NV2_ELECTRON: 0, Slot.NV2_NUCLEAR: 0},
}

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def spin1_operators() -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (Sx, Sy, Sz) for spin 1 in the (+1, 0, -1) basis."""
    s = 1.0 / np.sqrt(2.0)
    sx = s * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
    sy = s * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return sx, sy, sz


def kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, ops)


def dagger(op: np.ndarray) -> np.ndarray:
    return op.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def embed_operator(op: np.ndarray, slot: Slot | str, layout: BasisTag | str = BasisTag.PAIR) -> np.ndarray:
    """Tensor ``op`` into ``slot`` with identities on every other factor of ``layout``."""
    layout = BasisTag(layout)
    try:
        slot = Slot(slot)
    except ValueError as exc:
        raise AlgebraError(f"unknown slot {slot!r}") from exc

    positions = _SLOT_POSITIONS[layout]
    if slot not in positions:
        raise AlgebraError(f"slot {slot.value} does not exist in layout {layout.value}")
    position = positions[slot]
    dims = layout.dims
    op = np.asarray(op, dtype=complex)
    if op.shape != (dims[position], dims[position]):
        raise AlgebraError(
            f"operator of shape {op.shape} does not fit slot {slot.value} (dim {dims[position]})"
        )

    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[position] = op
    return kron_all(factors)


def partial_trace_dims(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every tensor factor of ``rho`` not listed in ``keep``."""
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    traced = [i for i in range(n) if i not in keep]

    tensor = rho.reshape(dims + dims)
    # contract traced factors pairwise, highest index first so axes stay valid
    for count, axis in enumerate(sorted(traced, reverse=True)):
        remaining = n - count
        tensor = np.trace(tensor, axis1=axis, axis2=axis + remaining)
    kept_dim = int(np.prod([dims[i] for i in keep])) if keep else 1
    return tensor.reshape(kept_dim, kept_dim)


_KEEP_FACTORS = {
    "electrons": (0, 2),
    "nv1-qubit": (0,),
    "nv2-qubit": (2,),
}


def partial_trace(rho: np.ndarray, keep: str = "electrons") -> np.ndarray:
    """Reduce a pair-81 state.

    ``electrons`` gives the 9-dim electron-pair state Tr_n(rho).  ``nv1-qubit``
    and ``nv2-qubit`` give that NV's full 3-level electron state, which holds the
    qubit levels plus the spectator level so trace is preserved.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise AlgebraError(f"partial trace needs a square matrix, got shape {rho.shape}")
    if rho.shape[0] != BasisTag.PAIR.dim:
        raise AlgebraError(f"partial trace expects a pair-81 state, got dim {rho.shape[0]}")
    if keep not in _KEEP_FACTORS:
        raise AlgebraError(f"unknown partial-trace target {keep!r}")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > 1e-6:
        raise AlgebraError(f"state trace {trace:.9f} deviates from 1", {"trace": trace})
    return partial_trace_dims(rho, BasisTag.PAIR.dims, _KEEP_FACTORS[keep])


def is_hermitian(op: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    scale = max(np.linalg.norm(op), 1.0)
    return bool(np.linalg.norm(op - dagger(op)) <= rtol * scale)


def is_unitary(op: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    ident = np.eye(op.shape[0])
    return bool(np.max(np.abs(dagger(op) @ op - ident)) < atol)


def process_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|Tr(U†V)|²/d², insensitive to global phase."""
    d = u.shape[0]
    return float(abs(np.trace(dagger(u) @ v)) ** 2 / d**2)


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, atol: float = 1e-10) -> bool:
    overlap = np.trace(dagger(v) @ u)
    if abs(overlap) < 1e-14:
        return False
    phase = overlap / abs(overlap)
    return bool(np.max(np.abs(u - phase * v)) < atol)


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed density matrix."""
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho)
