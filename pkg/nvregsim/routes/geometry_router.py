"""Field-geometry commands: ODMR inversion, forward transitions and the NV-NV distance bound."""
import logging

from nvregsim.core.routing import CommandResult, CommandRouter
from nvregsim.schemas.experiment_schema import DistanceRequest, GeometryForwardRequest, GeometrySolveRequest
from nvregsim.simulation.geometry import (
    GAMMA_E_MHZ_PER_G,
    distance_bound,
    forward_transitions,
    polar_angle_in_second_frame,
    solve_field_from_odmr,
    solve_second_angle,
)

logger = logging.getLogger(__name__)

router = CommandRouter()


@router.command("solve", help="field magnitude and polar angle from one NV's ODMR lines",
                request_model=GeometrySolveRequest, uses_config=False)
def solve_field(request: GeometrySolveRequest, ctx) -> CommandResult:
    solution = solve_field_from_odmr(request.nu1, request.nu2, request.d, request.e)
    results = {
        "omega_e_mhz": solution.omega_e,
        "b_gauss": solution.b_mag,
        "theta_deg": solution.theta,
        "theta_alt_deg": solution.theta_alt,
        "method": solution.method,
        "radicand": solution.radicand,
    }
    if request.theta_b is not None:
        azimuth = solve_second_angle(solution.theta, request.theta_b, request.beta)
        results.update(
            phi_deg=azimuth.phi,
            phi_alt_deg=azimuth.phi_alt,
            phi_sign_ambiguous=azimuth.ambiguous_sign,
        )
    logger.info("solved |B|=%.3f G, theta=%.3f deg (%s)", solution.b_mag, solution.theta, solution.method)
    return CommandResult(results)


@router.command("forward", help="ODMR transitions of one NV for a given field",
                request_model=GeometryForwardRequest, uses_config=False)
def forward_field(request: GeometryForwardRequest, ctx) -> CommandResult:
    omega_e = request.b_gauss * abs(GAMMA_E_MHZ_PER_G)
    nu1, nu2 = forward_transitions(omega_e, request.theta, request.phi, request.d, request.e)
    return CommandResult({
        "omega_e_mhz": omega_e,
        "nu1_mhz": nu1,
        "nu2_mhz": nu2,
        "theta_second_nv_deg": polar_angle_in_second_frame(request.theta, request.phi),
    })


@router.command("distance", help="largest NV-NV separation compatible with a dipolar coupling",
                request_model=DistanceRequest, uses_config=False)
def distance(request: DistanceRequest, ctx) -> CommandResult:
    return CommandResult({"nu_dip_mhz": request.nu_dip, "r_max_nm": distance_bound(request.nu_dip)})
