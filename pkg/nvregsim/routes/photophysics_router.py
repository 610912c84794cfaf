"""Photophysics command: field-induced initialization loss and readout contrast from the rate model."""
import logging

import numpy as np

from nvregsim.core.routing import CommandResult, CommandRouter
from nvregsim.schemas.experiment_schema import PhotophysicsRequest
from nvregsim.schemas.report_schema import TableSpec
from nvregsim.simulation.photophysics import (
    RATE_COLUMNS,
    build_rate_model,
    init_and_spam,
    mean_spam,
    rate_column,
    relative_contrast,
)

logger = logging.getLogger(__name__)

router = CommandRouter()


@router.command("rates", help="initialization fidelity, SPAM ratio and contrast curve of the rate model",
                request_model=PhotophysicsRequest, uses_config=False)
def photophysics_rates(request: PhotophysicsRequest, ctx) -> CommandResult:
    names = list(RATE_COLUMNS) if request.rate_column == "both" else [request.rate_column]
    mix_excited = not request.ground_only
    b_values = np.linspace(0.0, request.b_max, request.b_points)

    results = {"b_gauss": request.b_gauss, "theta_deg": request.theta, "columns": {}}
    rows = []
    for name in names:
        column = rate_column(name)
        spam = init_and_spam(
            build_rate_model(column, request.b_gauss, request.theta, request.d, mix_excited),
            build_rate_model(column, 0.0, request.theta, request.d, mix_excited),
            request.laser_ns,
            request.wait_ns,
        )
        curve = relative_contrast(column, b_values, request.theta, request.d, mix_excited=mix_excited)
        results["columns"][name] = {"rates": column.to_dict(), "spam": spam.to_dict()}
        rows += [[name, p.b_gauss, p.contrast, p.reference, p.ratio] for p in curve]
        logger.info("%s rates: F_init=%.3f at %.1f G, %.3f at 0 G", name, spam.f_init_field, request.b_gauss, spam.f_init_zero)

    if len(names) > 1:
        results["mean_spam"] = mean_spam(
            request.b_gauss, request.theta, request.d, names, request.laser_ns, request.wait_ns, mix_excited
        ).to_dict()

    table = TableSpec(
        name="contrast",
        description=f"readout contrast at theta={request.theta} deg relative to an aligned NV",
        columns=["rate_column", "b_gauss", "contrast", "aligned_contrast", "ratio"],
        rows=rows,
    )
    return CommandResult(results, [table])
