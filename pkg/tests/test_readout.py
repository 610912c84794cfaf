import numpy as np
import pytest

from nvregsim.core.errors import AlgebraError, ConfigValidationError
from nvregsim.simulation.readout import (
    STANDARD_QUBIT_LAYOUT,
    ChargeMixture,
    apply_decoherence,
    charge_mixture_signal,
    default_layout,
    mean_t2,
    povm_readout,
    spin_init_state,
)


def _basis_state(index: int) -> np.ndarray:
    rho = np.zeros((4, 4), dtype=complex)
    rho[index, index] = 1.0
    return rho


def test_alternating_readout_of_basis_states():
    assert povm_readout(_basis_state(0), 0.1, 0.2, STANDARD_QUBIT_LAYOUT) == pytest.approx(1.0)
    assert povm_readout(_basis_state(3), 0.1, 0.2, STANDARD_QUBIT_LAYOUT) == pytest.approx(-1.0)
    # |01>: NV1 bright, NV2 dark
    assert povm_readout(_basis_state(1), 0.1, 0.2, STANDARD_QUBIT_LAYOUT) == pytest.approx((0.1 - 0.2) / 0.3)


def test_maximally_mixed_state_reads_zero():
    assert povm_readout(np.eye(4) / 4, 0.15, 0.15) == pytest.approx(0.0)


def test_plain_readout():
    assert povm_readout(_basis_state(0), 0.1, 0.1, alternating=False) == pytest.approx(1.0)
    assert povm_readout(_basis_state(3), 0.1, 0.1, alternating=False) == pytest.approx(-1.0)


def test_inactive_centre_contributes_constant():
    value = povm_readout(_basis_state(3), 0.1, 0.1, alternating=False, active=(True, False))
    assert value == pytest.approx(0.0)


def test_readout_rejects_unnormalized_state():
    with pytest.raises(AlgebraError):
        povm_readout(np.eye(4), 0.1, 0.1)


def test_readout_rejects_zero_contrast():
    with pytest.raises(AlgebraError):
        povm_readout(_basis_state(0), 0.0, 0.0)


def test_register_layouts():
    assert default_layout(81).dim == 81
    assert default_layout(9).qubit_levels == ((1, 0), (1, 0))
    with pytest.raises(AlgebraError):
        default_layout(5)


def test_independent_mixture_weights():
    mixture = ChargeMixture.independent(0.7)
    assert mixture.weights == pytest.approx((0.49, 0.21, 0.21, 0.09))
    assert ChargeMixture.independent(1.0).weights == ChargeMixture.pure().weights
    assert [c.coupled for c in mixture.configs] == [True, False, False, False]


def test_mixture_validation():
    with pytest.raises(ConfigValidationError):
        ChargeMixture((0.5, 0.5, 0.5, 0.0))
    with pytest.raises(ConfigValidationError):
        charge_mixture_signal([1.0, 0.0], ChargeMixture.pure())


def test_mixture_signal_is_weighted_sum():
    assert charge_mixture_signal([1.0, 0.5, 0.5, 0.0], ChargeMixture()) == pytest.approx(0.49 + 0.21)


def test_decoherence_uses_mean_t2():
    assert mean_t2(454.0, 476.0) == pytest.approx(465.0)
    assert apply_decoherence(1.0, 465.0, 454.0, 476.0) == pytest.approx(np.exp(-1.0))
    with pytest.raises(ConfigValidationError):
        mean_t2(0.0, 476.0)


def test_spin_init_state():
    rho = spin_init_state(0.9)
    assert np.diag(rho).real == pytest.approx([0.05, 0.9, 0.05])
    with pytest.raises(ConfigValidationError):
        spin_init_state(0.2)
