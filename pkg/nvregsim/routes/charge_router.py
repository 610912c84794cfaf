"""
Charge-statistics commands
``charge fit`` fits Poisson mixtures to photon-number histograms and tables
the post-selection trade-off; ``charge asymmetry`` sweeps the NV- probability
through simulated DEER traces.
"""
import logging

import numpy as np

from nvregsim.core.routing import CommandContext, CommandResult, CommandRouter
from nvregsim.schemas.experiment_schema import AsymmetryRequest, ChargeFitRequest
from nvregsim.schemas.report_schema import TableSpec
from nvregsim.simulation.charge_stats import (
    JointShots,
    PhotonHistogram,
    ThresholdModel,
    asymmetry_sweep,
    fit_poisson_mixture,
    independent_asymmetry,
    threshold_tradeoff,
)
from nvregsim.utils.reporting import read_csv_rows

logger = logging.getLogger(__name__)

router = CommandRouter()

THRESHOLD_COLUMNS = ["n_thresh", "fidelity", "noise_ratio", "kept_fraction"]


@router.command("fit", help="Poisson-mixture fit of a photon histogram and the threshold table",
                request_model=ChargeFitRequest, uses_config=False)
def fit_charge_histogram(request: ChargeFitRequest, ctx) -> CommandResult:
    rows = read_csv_rows(request.histogram, ["n_photons", "count"])
    hist = PhotonHistogram.from_rows([(int(n), int(c)) for n, c in rows], request.window_ms)
    fit = fit_poisson_mixture(hist, request.components, request.method)

    n = hist.photon_numbers
    expected = fit.pmf(n) * hist.total_shots
    tables = [
        TableSpec(
            name="fit",
            description=f"photon histogram and {fit.method} mixture model",
            columns=["n_photons", "count", "model"],
            rows=[[int(k), int(c), float(e)] for k, c, e in zip(n, hist.counts, expected)],
        )
    ]

    thresholds = range(request.max_threshold + 1)
    if request.joint:
        joint_rows = read_csv_rows(request.joint, ["n_init", "n_read"])
        shots = JointShots(
            np.array([int(r[0]) for r in joint_rows]), np.array([int(r[1]) for r in joint_rows])
        )
        points = threshold_tradeoff(shots, thresholds, method=request.method)
        source = "joint shots"
    else:
        # predicted from the fitted mixture when no per-shot data is given
        points = threshold_tradeoff(ThresholdModel(tuple(fit.weights), tuple(fit.lambdas)), thresholds)
        source = "fitted mixture"
    tables.append(
        TableSpec(
            name="thresholds",
            description=f"post-selection trade-off ({source})",
            columns=THRESHOLD_COLUMNS,
            rows=[[p.threshold, p.fidelity, p.noise_ratio, p.kept_fraction] for p in points],
        )
    )
    logger.info("charge fit: lambdas=%s weights=%s", np.round(fit.lambdas, 3), np.round(fit.weights, 3))
    return CommandResult({"fit": fit.to_dict(), "shots": hist.total_shots, "threshold_source": source}, tables)


@router.command("asymmetry", help="DEER asymmetry against NV- probability for independent charge states",
                request_model=AsymmetryRequest)
def charge_asymmetry(request: AsymmetryRequest, ctx: CommandContext) -> CommandResult:
    cfg = ctx.config
    tau1 = cfg.pulses.tau1_ns
    tau2 = np.linspace(0.0, min(request.tau2_max_ns, tau1 / 2), request.points)
    options = ctx.options()
    simulated = asymmetry_sweep(
        ctx.register(), request.p_minus, tau1, tau2, request.n_pi,
        style=ctx.style(), options=options, f_init=cfg.model.f_init, workers=ctx.workers,
    )
    rows = [[p, a, independent_asymmetry(p)] for p, a in simulated.items()]
    table = TableSpec(
        name="asymmetry",
        description="Y-projection DEER asymmetry, simulated and independent-statistics prediction",
        columns=["p_minus", "asymmetry", "predicted"],
        rows=rows,
    )
    return CommandResult({"points": [dict(zip(table.columns, r)) for r in rows]}, [table], frame=options.frame)
