import numpy as np
import pytest

from nvregsim.core.algebra import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    BasisTag,
    Slot,
    commutator,
    embed_operator,
    equal_up_to_phase,
    is_hermitian,
    is_unitary,
    kron_all,
    partial_trace,
    process_fidelity,
    random_density_matrix,
    spin1_operators,
)
from nvregsim.core.errors import AlgebraError


def test_spin1_commutation_relations():
    sx, sy, sz = spin1_operators()
    assert np.allclose(commutator(sx, sy), 1j * sz)
    assert np.allclose(commutator(sy, sz), 1j * sx)
    assert np.allclose(sx @ sx + sy @ sy + sz @ sz, 2 * np.eye(3))


def test_spin1_basis_order_is_plus_zero_minus():
    _, _, sz = spin1_operators()
    assert np.allclose(np.diag(sz).real, [1.0, 0.0, -1.0])


def test_embed_operator_places_factor_in_slot():
    _, _, sz = spin1_operators()
    embedded = embed_operator(sz, Slot.NV2_ELECTRON)
    expected = kron_all([np.eye(3), np.eye(3), sz, np.eye(3)])
    assert embedded.shape == (81, 81)
    assert np.allclose(embedded, expected)


def test_embed_operator_accepts_string_tags():
    embedded = embed_operator(PAULI_Z, "nv1-electron", "qubitpair-4")
    assert np.allclose(embedded, np.kron(PAULI_Z, np.eye(2)))


def test_embed_operator_rejects_shape_mismatch():
    with pytest.raises(AlgebraError, match="does not fit"):
        embed_operator(PAULI_X, Slot.NV1_ELECTRON, BasisTag.PAIR)


def test_embed_operator_rejects_missing_slot():
    with pytest.raises(AlgebraError):
        embed_operator(PAULI_X, Slot.NV1_NUCLEAR, BasisTag.QUBIT_PAIR)


def test_partial_trace_of_product_state(rng):
    rho_e1 = random_density_matrix(3, rng)
    rho_e2 = random_density_matrix(3, rng)
    rho_n = np.eye(3) / 3
    rho = kron_all([rho_e1, rho_n, rho_e2, rho_n])

    assert np.allclose(partial_trace(rho, "electrons"), np.kron(rho_e1, rho_e2))
    assert np.allclose(partial_trace(rho, "nv1-qubit"), rho_e1)
    assert np.allclose(partial_trace(rho, "nv2-qubit"), rho_e2)


def test_partial_trace_preserves_trace(rng):
    rho = random_density_matrix(81, rng, rank=3)
    assert np.trace(partial_trace(rho)).real == pytest.approx(1.0)


def test_partial_trace_rejects_wrong_dimension():
    with pytest.raises(AlgebraError, match="pair-81"):
        partial_trace(np.eye(9) / 9)


def test_partial_trace_rejects_unnormalized_state():
    with pytest.raises(AlgebraError, match="trace"):
        partial_trace(np.eye(81))


def test_random_density_matrix_is_valid(rng):
    rho = random_density_matrix(4, rng, rank=2)
    assert is_hermitian(rho)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(rho).min() > -1e-12
    assert np.linalg.matrix_rank(rho, tol=1e-10) == 2


def test_process_fidelity_ignores_global_phase():
    u = np.exp(-0.5j * np.pi / 2 * PAULI_Y)
    assert is_unitary(u)
    assert process_fidelity(u, np.exp(0.3j) * u) == pytest.approx(1.0)
    assert equal_up_to_phase(np.exp(0.3j) * u, u)
    assert not equal_up_to_phase(u, PAULI_X)
