"""
Sequence commands
DEER traces (``simulate deer``), sqrt(ZZ) calibration (``calibrate zz``) and
the XY8 pulse-spacing scan (``scan tau1``).
"""
import logging

import numpy as np

from nvregsim.core.errors import SequenceError
from nvregsim.core.routing import CommandContext, CommandResult, CommandRouter
from nvregsim.schemas.experiment_schema import CalibrationExperiment, DeerExperiment, Tau1Experiment
from nvregsim.schemas.report_schema import TableSpec
from nvregsim.simulation.sequences import calibrate_tau2, deer_scan, scan_tau1

logger = logging.getLogger(__name__)

simulate_router = CommandRouter()
calibrate_router = CommandRouter()
scan_router = CommandRouter()


def _tau2_sweep(explicit, tau2_max: float, points: int, tau1: float) -> np.ndarray:
    if explicit:
        return np.asarray(explicit, dtype=float)
    return np.linspace(0.0, min(tau2_max, tau1 / 2), points)


@simulate_router.command("deer", help="target-NV coherence against tau2 in the X and Y projections")
def simulate_deer(request, ctx: CommandContext) -> CommandResult:
    cfg = ctx.config
    block = cfg.block(DeerExperiment)
    model = ctx.register()
    options = ctx.options()
    tau1 = cfg.pulses.tau1_ns
    tau2 = _tau2_sweep(block.tau2_ns, block.tau2_max_ns, block.points, tau1)
    mixture = cfg.model.mixture() if block.use_mixture else None

    scans = {}
    for projection in block.projections:
        scans[projection] = deer_scan(
            model, tau1, tau2, block.n_pi, projection, block.control_state, block.target,
            ctx.style(), options, cfg.model.f_init, mixture, cfg.model.t2_us, ctx.workers,
        )

    results = {"tau1_ns": tau1, "n_pi": block.n_pi, "target": block.target, "control_state": block.control_state}
    for projection, scan in scans.items():
        entry = {"fit": scan.fit.to_dict()}
        try:
            entry["asymmetry"] = scan.asymmetry
        except SequenceError:
            entry["asymmetry"] = None
        results[projection] = entry
    if "X" in scans:
        fit = scans["X"].fit
        results["nu_dip_mhz"] = fit.value("frequency")
        results["nu_dip_sigma_mhz"] = fit.sigma("frequency")

    columns = ["tau2_ns", "t_evol_us"] + [f"sigma_{p.lower()}" for p in scans]
    first = next(iter(scans.values()))
    rows = [
        [float(t), float(te)] + [float(s.signal[i]) for s in scans.values()]
        for i, (t, te) in enumerate(zip(first.tau2, first.t_evol))
    ]
    table = TableSpec(name="trace", description="DEER signal of the target NV", columns=columns, rows=rows)
    return CommandResult(results, [table], frame=options.frame)


@calibrate_router.command("zz", help="calibrate tau2 of the sqrt(ZZ) gate by repeated application")
def calibrate_zz(request, ctx: CommandContext) -> CommandResult:
    cfg = ctx.config
    block = cfg.block(CalibrationExperiment)
    options = ctx.options()
    tau1 = cfg.pulses.tau1_ns
    tau2_max = block.tau2_max_ns or min(400.0, tau1 / 2)
    calibration = calibrate_tau2(
        ctx.register(), tau1, block.n_rep, cfg.pulses.n_pi,
        np.linspace(0.0, min(tau2_max, tau1 / 2), block.points), ctx.style(), options, ctx.workers,
    )
    results = calibration.to_dict()
    results["configured_nu_dip_mhz"] = cfg.model.nu_dip_mhz
    results["fit"] = calibration.fit.to_dict()
    rows = [[float(t), float(s)] for t, s in zip(calibration.tau2_scan, calibration.signal)]
    table = TableSpec(
        name="calibration",
        description=f"fluorescence after {block.n_rep} sqrt(ZZ) gates",
        columns=["tau2_ns", "signal"],
        rows=rows,
    )
    return CommandResult(results, [table], frame=options.frame)


@scan_router.command("tau1", help="XY8 survival of a superposition against pulse spacing")
def scan_pulse_spacing(request, ctx: CommandContext) -> CommandResult:
    block = ctx.config.block(Tau1Experiment)
    options = ctx.options()
    scan = scan_tau1(ctx.register(), block.tau1_ns, block.n_xy, block.target, ctx.style(), options, ctx.workers)
    table = TableSpec(
        name="tau1",
        description=f"XY8-{block.n_xy} survival on NV{block.target}",
        columns=["tau1_ns", "survival"],
        rows=[[float(t), float(s)] for t, s in zip(scan.tau1, scan.survival)],
    )
    return CommandResult(scan.to_dict(), [table], frame=options.frame)
