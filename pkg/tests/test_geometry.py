import numpy as np
import pytest

from nvregsim.core.errors import GeometryError, InconsistentGeometryError, UnphysicalTransitionsError
from nvregsim.simulation.geometry import (
    TETRAHEDRAL_BETA,
    FieldGeometry,
    distance_bound,
    forward_transitions,
    polar_angle_in_second_frame,
    rotate_field_to_second_frame,
    solve_field_from_odmr,
    solve_second_angle,
)

NU1, NU2, D2 = 2571.0, 3160.2, 2865.42


def test_solve_field_from_setting2_lines():
    solution = solve_field_from_odmr(NU1, NU2, D2)
    assert solution.omega_e == pytest.approx(295.18, abs=0.01)
    assert solution.b_mag == pytest.approx(105.33, abs=0.02)
    assert solution.theta == pytest.approx(3.58, abs=0.05)
    assert solution.theta_alt == pytest.approx(180.0 - solution.theta)


def test_solve_field_from_setting1_lines():
    solution = solve_field_from_odmr(2829.4, 2932.5, 2865.42)
    assert solution.omega_e == pytest.approx(180.01, abs=0.02)
    assert solution.theta == pytest.approx(73.42, abs=0.05)


def test_solved_field_reproduces_transitions():
    solution = solve_field_from_odmr(NU1, NU2, D2)
    lo, hi = forward_transitions(solution.omega_e, solution.theta, 0.0, D2)
    assert lo == pytest.approx(NU1, abs=0.1)
    assert hi == pytest.approx(NU2, abs=0.1)


def test_solve_accepts_swapped_lines():
    a = solve_field_from_odmr(NU2, NU1, D2)
    b = solve_field_from_odmr(NU1, NU2, D2)
    assert a.omega_e == pytest.approx(b.omega_e)
    assert a.theta == pytest.approx(b.theta)


@pytest.mark.parametrize("theta", [0.0, 20.0, 55.0, 74.08, 89.0])
def test_forward_then_inverse_recovers_angle(theta):
    lo, hi = forward_transitions(300.0, theta, 0.0, 2870.0)
    solution = solve_field_from_odmr(lo, hi, 2870.0)
    assert solution.omega_e == pytest.approx(300.0, abs=1e-6)
    assert solution.theta == pytest.approx(theta, abs=0.05)


def test_random_fields_round_trip(rng):
    for omega_e, theta in zip(rng.uniform(50.0, 400.0, 100), rng.uniform(1.0, 89.0, 100)):
        lo, hi = forward_transitions(omega_e, theta, 0.0, D2)
        solution = solve_field_from_odmr(lo, hi, D2)
        assert solution.omega_e == pytest.approx(omega_e, rel=1e-6)
        assert solution.theta == pytest.approx(theta, abs=0.05)


def test_aligned_field_splits_symmetrically():
    lo, hi = forward_transitions(100.0, 0.0, 0.0, 2870.0)
    assert lo == pytest.approx(2770.0)
    assert hi == pytest.approx(2970.0)


def test_unphysical_transitions_raise_with_radicand():
    with pytest.raises(UnphysicalTransitionsError) as info:
        solve_field_from_odmr(2800.0, 2900.0, 2870.0)
    assert info.value.radicand <= 0


def test_second_angle_round_trip():
    phi = 172.73
    theta_b = polar_angle_in_second_frame(74.08, phi, 70.53)
    solution = solve_second_angle(74.08, theta_b, 70.53)
    assert solution.phi == pytest.approx(phi, abs=1e-6)
    assert solution.phi_alt == pytest.approx(-phi, abs=1e-6)
    assert solution.ambiguous_sign


def test_setting2_azimuth_with_second_nv_as_reference():
    solution = solve_second_angle(3.58, 74.08, 70.53)
    assert solution.phi == pytest.approx(172.73, abs=1.0)
    assert polar_angle_in_second_frame(3.58, 172.73, 70.53) == pytest.approx(74.08, abs=0.05)


def test_setting2_angles_in_printed_order_give_small_azimuth():
    solution = solve_second_angle(74.08, 3.58, 70.53)
    assert solution.phi == pytest.approx(0.4856, abs=0.01)
    assert solution.phi_alt == pytest.approx(-solution.phi)
    assert solution.ambiguous_sign
    assert polar_angle_in_second_frame(74.08, 172.73, 70.53) != pytest.approx(3.58, abs=1.0)


def test_inconsistent_angles_raise():
    with pytest.raises(InconsistentGeometryError):
        solve_second_angle(10.0, 5.0, 70.53)


def test_azimuth_undefined_on_reference_axis():
    with pytest.raises(InconsistentGeometryError):
        solve_second_angle(0.0, 70.0)


def test_rotation_matches_polar_angle_in_second_frame():
    geometry = FieldGeometry(b_mag=105.33, theta=(74.08, 3.58), phi=40.0)
    b2 = rotate_field_to_second_frame(geometry.reference_field(), TETRAHEDRAL_BETA)
    theta_b = np.degrees(np.arccos(b2[2] / np.linalg.norm(b2)))
    assert theta_b == pytest.approx(polar_angle_in_second_frame(74.08, 40.0), abs=1e-9)
    assert np.linalg.norm(b2) == pytest.approx(105.33)


def test_field_geometry_validates_inputs():
    with pytest.raises(GeometryError):
        FieldGeometry(b_mag=-1.0, theta=(0.0, 0.0))
    with pytest.raises(GeometryError):
        FieldGeometry(b_mag=10.0, theta=(0.0, 180.0))
    with pytest.raises(GeometryError):
        FieldGeometry(b_mag=10.0, theta=(0.0, 0.0), reference_nv=3)


def test_distance_bound_for_measured_coupling():
    assert distance_bound(0.11289) == pytest.approx(9.7, abs=0.3)


def test_distance_bound_shrinks_with_coupling():
    assert distance_bound(0.05) > distance_bound(0.1) > distance_bound(1.0)
    with pytest.raises(GeometryError):
        distance_bound(0.0)
