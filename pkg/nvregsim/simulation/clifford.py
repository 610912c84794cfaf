"""
Clifford groups and native synthesis
One- and two-qubit Clifford groups indexed the standard way (24 single-qubit
elements; 11520 two-qubit elements as starter pair times entangling-class
mixer), Pauli-conjugation keys for exact lookup and inversion, and
decomposition into the native set {pi, pi/2 about +-x, +-y on each NV} plus the
sqrt(ZZ) gate.
"""
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
import itertools
import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from nvregsim.core.algebra import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, dagger, equal_up_to_phase, kron_all
from nvregsim.core.errors import CliffordSynthesisError
from nvregsim.simulation.propagation import PULSE_AREAS, PULSE_PHASES, qubit_rotation

logger = logging.getLogger(__name__)

SINGLE_QUBIT_SIZE = 24
TWO_QUBIT_SIZE = 11520

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)


@dataclass(frozen=True)
class NativeGate:
    """A native pulse (``kind`` pi or pi_half, ``phase`` X/Y/-X/-Y on ``target``) or the sqrt(ZZ) gate."""

    kind: str
    phase: str = "X"
    target: int = 0

    @property
    def is_entangling(self) -> bool:
        return self.kind == "sqrt_zz"

    def qubit_unitary(self) -> np.ndarray:
        return qubit_rotation(PULSE_AREAS[self.kind], PULSE_PHASES[self.phase])

    def __str__(self) -> str:
        if self.is_entangling:
            return "sqrt_zz"
        return f"{self.kind}_{self.phase}@{self.target}"


SQRT_ZZ = NativeGate("sqrt_zz")

# single-qubit generators for the minimal-length table
GENERATORS = (
    ("pi", "X"), ("pi", "Y"), ("pi_half", "X"), ("pi_half", "-X"), ("pi_half", "Y"), ("pi_half", "-Y"),
)


def sqrt_zz_unitary(chi: float = np.pi / 2) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * chi), np.exp(1j * chi), 1.0])


def compose_natives(gates: Sequence[NativeGate], chi: float = np.pi / 2) -> np.ndarray:
    """Ideal 4x4 unitary of a native gate list applied in order."""
    u = np.eye(4, dtype=complex)
    for gate in gates:
        if gate.is_entangling:
            op = sqrt_zz_unitary(chi)
        elif gate.target == 1:
            op = np.kron(gate.qubit_unitary(), PAULI_I)
        else:
            op = np.kron(PAULI_I, gate.qubit_unitary())
        u = op @ u
    return u


def cnot_pulse_train(chi: float = np.pi / 2) -> List[NativeGate]:
    """CNOT (NV1 controls NV2) around one sqrt(ZZ) of entangling phase ``chi`` = +-pi/2."""
    head = [
        NativeGate("pi_half", "X", 1), NativeGate("pi_half", "-X", 2),
        NativeGate("pi_half", "Y", 1), NativeGate("pi_half", "Y", 2),
    ]
    if chi > 0:
        return head + [NativeGate("pi_half", "X", 1), SQRT_ZZ, NativeGate("pi_half", "-Y", 2), NativeGate("pi", "X", 1)]
    return head + [NativeGate("pi_half", "-X", 1), SQRT_ZZ, NativeGate("pi_half", "-Y", 2)]


# ============================
# PAULI KEYS
# ============================

@lru_cache(maxsize=None)
def _pauli_basis(n_qubits: int) -> Tuple[np.ndarray, np.ndarray]:
    """(all 4^n Pauli strings, the 2n generators X_k and Z_k)."""
    singles = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)
    strings = np.array([kron_all(p) for p in itertools.product(singles, repeat=n_qubits)])
    generators = []
    for k in range(n_qubits):
        for pauli in (PAULI_X, PAULI_Z):
            factors = [PAULI_I] * n_qubits
            factors[k] = pauli
            generators.append(kron_all(factors))
    return strings, np.array(generators)


def pauli_keys(unitaries: np.ndarray) -> List[bytes]:
    """Phase-free identity of each Clifford: the signed Pauli images of X_k and Z_k."""
    unitaries = np.asarray(unitaries)
    single = unitaries.ndim == 2
    if single:
        unitaries = unitaries[None]
    dim = unitaries.shape[-1]
    n_qubits = int(np.log2(dim))
    strings, generators = _pauli_basis(n_qubits)
    images = np.einsum("cij,gjk,clk->cgil", unitaries, generators, unitaries.conj())
    coefficients = np.einsum("qji,cgij->cgq", strings, images).real / dim
    table = np.rint(coefficients).astype(np.int8)
    return [row.tobytes() for row in table]


def pauli_key(u: np.ndarray) -> bytes:
    return pauli_keys(u)[0]


# ============================
# GROUP CONSTRUCTION
# ============================

GateList = List[Tuple[str, float]]


def _rotation(axis: str, exponent: float) -> np.ndarray:
    phase = 0.0 if axis == "X" else np.pi / 2
    return qubit_rotation(np.pi * exponent, phase)


def _gate_list_unitary(gates: GateList) -> np.ndarray:
    u = np.eye(2, dtype=complex)
    for axis, exponent in gates:
        u = _rotation(axis, exponent) @ u
    return u


@lru_cache(maxsize=None)
def single_qubit_gate_lists() -> Tuple[Tuple[GateList, ...], Tuple[GateList, ...], Tuple[GateList, ...], Tuple[GateList, ...]]:
    """C1 (24 elements) and the S1, S1^(X/2), S1^(Y/2) cosets, as (axis, exponent) lists."""
    c1: List[GateList] = []
    for phi_0, phi_1 in itertools.product([1.0, 0.5, -0.5], [0.0, 0.5, -0.5]):
        c1.append([("X", phi_0), ("Y", phi_1)])
        c1.append([("Y", phi_0), ("X", phi_1)])
    c1.append([])
    c1.append([("Y", 1.0), ("X", 1.0)])
    for y0, x, y1 in ([-0.5, 0.5, 0.5], [-0.5, -0.5, 0.5], [0.5, 0.5, 0.5], [-0.5, 0.5, -0.5]):
        c1.append([("Y", y0), ("X", x), ("Y", y1)])

    s1 = [[], [("Y", 0.5), ("X", 0.5)], [("X", -0.5), ("Y", -0.5)]]
    s1_x = [[("X", 0.5)], [("X", 0.5), ("Y", 0.5), ("X", 0.5)], [("Y", -0.5)]]
    s1_y = [[("Y", 0.5)], [("X", -0.5), ("Y", -0.5), ("X", 0.5)], [("Y", 1.0), ("X", 0.5)]]
    return tuple(c1), tuple(s1), tuple(s1_x), tuple(s1_y)


# a mixer step is ("cz",) or (qubit, [(axis, exponent), ...])
MixerStep = Union[Tuple[str], Tuple[int, GateList]]


def mixer_steps(index: int) -> List[MixerStep]:
    """Entangling-class part of a two-qubit Clifford (0 identity, 1 SWAP-like, 2-10 CNOT-like, 11-19 iSWAP-like)."""
    _, s1, s1_x, s1_y = single_qubit_gate_lists()
    if index == 0:
        return []
    if index == 1:
        return [
            ("cz",), (1, [("Y", -0.5)]), (2, [("Y", 0.5)]),
            ("cz",), (1, [("Y", 0.5)]), (2, [("Y", -0.5)]),
            ("cz",), (2, [("Y", 0.5)]),
        ]
    if 2 <= index <= 10:
        a, b = divmod(index - 2, 3)
        return [("cz",), (1, list(s1[a])), (2, list(s1_y[b]))]
    a, b = divmod(index - 11, 3)
    return [("cz",), (1, [("Y", 0.5)]), (2, [("X", -0.5)]), ("cz",), (1, list(s1_y[a])), (2, list(s1_x[b]))]


def split_two_qubit_index(index: int) -> Tuple[int, int, int]:
    i0, rest = divmod(index, 480)
    i1, i2 = divmod(rest, 20)
    return i0, i1, i2


def two_qubit_steps(index: int) -> List[MixerStep]:
    """Time-ordered construction of Clifford ``index``: starter pair then mixer."""
    c1 = single_qubit_gate_lists()[0]
    i0, i1, i2 = split_two_qubit_index(index)
    return [(1, list(c1[i0])), (2, list(c1[i1]))] + mixer_steps(i2)


def _steps_unitary(steps: Sequence[MixerStep]) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    for step in steps:
        if step[0] == "cz":
            op = CZ
        elif step[0] == 1:
            op = np.kron(_gate_list_unitary(step[1]), PAULI_I)
        else:
            op = np.kron(PAULI_I, _gate_list_unitary(step[1]))
        u = op @ u
    return u


@dataclass(frozen=True, eq=False)
class CliffordElement:
    n_qubits: int
    index: int
    unitary: np.ndarray

    @property
    def key(self) -> bytes:
        return pauli_key(self.unitary)

    def __eq__(self, other) -> bool:
        return isinstance(other, CliffordElement) and (self.n_qubits, self.index) == (other.n_qubits, other.index)

    def __hash__(self) -> int:
        return hash((self.n_qubits, self.index))


class CliffordGroup:
    """Enumerated Clifford group with key lookup; built once per qubit count."""

    def __init__(self, n_qubits: int):
        if n_qubits not in (1, 2):
            raise CliffordSynthesisError(f"only 1- and 2-qubit Clifford groups are supported, got {n_qubits}")
        self.n_qubits = n_qubits
        if n_qubits == 1:
            self.unitaries = np.array([_gate_list_unitary(g) for g in single_qubit_gate_lists()[0]])
        else:
            c1 = np.array([_gate_list_unitary(g) for g in single_qubit_gate_lists()[0]])
            mixers = np.array([_steps_unitary(mixer_steps(i)) for i in range(20)])
            starters = np.einsum("aij,bkl->abikjl", c1, c1).reshape(24, 24, 4, 4)
            self.unitaries = np.einsum("mij,abjk->abmik", mixers, starters).reshape(TWO_QUBIT_SIZE, 4, 4)
        keys = pauli_keys(self.unitaries)
        self._index = {key: i for i, key in enumerate(keys)}
        if len(self._index) != len(self.unitaries):
            raise CliffordSynthesisError(
                f"{n_qubits}-qubit enumeration produced {len(self._index)} distinct elements of {len(self.unitaries)}"
            )
        logger.debug("built %d-qubit Clifford group with %d elements", n_qubits, len(self.unitaries))

    def __len__(self) -> int:
        return len(self.unitaries)

    def element(self, index: int) -> CliffordElement:
        return CliffordElement(self.n_qubits, int(index), self.unitaries[index])

    def lookup(self, u: np.ndarray) -> CliffordElement:
        try:
            return self.element(self._index[pauli_key(u)])
        except KeyError as exc:
            raise CliffordSynthesisError("unitary is not a Clifford of this group") from exc

    def compose(self, first: CliffordElement, second: CliffordElement) -> CliffordElement:
        """``first`` then ``second``."""
        return self.lookup(second.unitary @ first.unitary)

    def inverse(self, c: CliffordElement) -> CliffordElement:
        return self.lookup(dagger(c.unitary))

    def sample(self, rng: np.random.Generator) -> CliffordElement:
        return self.element(int(rng.integers(len(self.unitaries))))


@lru_cache(maxsize=None)
def clifford_group(n_qubits: int) -> CliffordGroup:
    return CliffordGroup(n_qubits)


def _as_rng(rng_or_seed: Union[None, int, np.random.Generator]) -> np.random.Generator:
    if isinstance(rng_or_seed, np.random.Generator):
        return rng_or_seed
    return np.random.default_rng(rng_or_seed)


def sample_clifford(n_qubits: int, rng: Union[None, int, np.random.Generator] = None) -> CliffordElement:
    return clifford_group(n_qubits).sample(_as_rng(rng))


# ============================
# NATIVE DECOMPOSITION
# ============================

@lru_cache(maxsize=None)
def minimal_single_qubit_table() -> Dict[bytes, Tuple[Tuple[str, str], ...]]:
    """Shortest generator sequence (kind, phase) for each of the 24 single-qubit Cliffords."""
    generators = [(g, qubit_rotation(PULSE_AREAS[g[0]], PULSE_PHASES[g[1]])) for g in GENERATORS]
    start = np.eye(2, dtype=complex)
    table = {pauli_key(start): ()}
    queue = deque([(start, ())])
    while queue and len(table) < SINGLE_QUBIT_SIZE:
        u, path = queue.popleft()
        for gate, op in generators:
            nxt = op @ u
            key = pauli_key(nxt)
            if key not in table:
                table[key] = path + (gate,)
                queue.append((nxt, path + (gate,)))
    return table


def single_qubit_natives(u2: np.ndarray, target: int) -> List[NativeGate]:
    try:
        path = minimal_single_qubit_table()[pauli_key(u2)]
    except KeyError as exc:
        raise CliffordSynthesisError("single-qubit run is not a Clifford") from exc
    return [NativeGate(kind, phase, target) for kind, phase in path]


def decompose_clifford(c: CliffordElement, chi: float = np.pi / 2) -> List[NativeGate]:
    """Native gate list (time order) realising ``c`` up to global phase.

    Each CZ becomes one sqrt(ZZ) dressed with phase gates diag(1, e^{-i chi}) on
    both qubits; single-qubit runs between entangling gates are merged and
    re-expressed minimally.  The bare CNOT uses the dedicated pulse train.
    """
    if c.n_qubits == 1:
        return single_qubit_natives(c.unitary, 1)
    if equal_up_to_phase(c.unitary, CNOT, atol=1e-9):
        return cnot_pulse_train(chi)

    dressing = np.diag([1.0, np.exp(-1j * chi)])
    pending = {1: np.eye(2, dtype=complex), 2: np.eye(2, dtype=complex)}
    gates: List[NativeGate] = []

    def flush() -> None:
        for q in (1, 2):
            gates.extend(single_qubit_natives(pending[q], q))
            pending[q] = np.eye(2, dtype=complex)

    for step in two_qubit_steps(c.index):
        if step[0] == "cz":
            flush()
            gates.append(SQRT_ZZ)
            pending[1] = dressing.copy()
            pending[2] = dressing.copy()
        else:
            pending[step[0]] = _gate_list_unitary(step[1]) @ pending[step[0]]
    flush()

    if not equal_up_to_phase(compose_natives(gates, chi), c.unitary, atol=1e-9):
        raise CliffordSynthesisError(f"native synthesis of Clifford {c.index} does not reproduce its unitary")
    return gates


@dataclass(frozen=True)
class GateCounts:
    single_qubit: float
    two_qubit: float

    def to_dict(self) -> dict:
        return {"gpc_1q": self.single_qubit, "gpc_2q": self.two_qubit}


def gate_counts(decompositions: Sequence[Sequence[NativeGate]]) -> GateCounts:
    """Average native gates per Clifford."""
    if not decompositions:
        return GateCounts(0.0, 0.0)
    n2 = [sum(g.is_entangling for g in d) for d in decompositions]
    n1 = [len(d) - k for d, k in zip(decompositions, n2)]
    return GateCounts(float(np.mean(n1)), float(np.mean(n2)))


def strip_entangling(gates: Sequence[NativeGate]) -> List[NativeGate]:
    """Drop every sqrt(ZZ) and append per-qubit corrections so the list composes to the identity."""
    kept = [g for g in gates if not g.is_entangling]
    totals = {1: np.eye(2, dtype=complex), 2: np.eye(2, dtype=complex)}
    for gate in kept:
        totals[gate.target] = gate.qubit_unitary() @ totals[gate.target]
    corrections = []
    for q in (1, 2):
        corrections.extend(single_qubit_natives(dagger(totals[q]), q))
    return kept + corrections


def random_sequence(
    n_qubits: int, length: int, rng: np.random.Generator, chi: float = np.pi / 2
) -> Tuple[List[CliffordElement], List[List[NativeGate]]]:
    """``length`` random Cliffords followed by the ideal inverse of their product."""
    group = clifford_group(n_qubits)
    elements = [group.sample(rng) for _ in range(length)]
    total = np.eye(2**n_qubits, dtype=complex)
    for e in elements:
        total = e.unitary @ total
    elements.append(group.lookup(dagger(total)))
    return elements, [decompose_clifford(e, chi) for e in elements]
