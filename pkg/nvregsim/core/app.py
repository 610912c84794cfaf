"""Command-line application factory"""
import logging
import os
import sys
from typing import Optional, Sequence

from sqlalchemy.exc import SQLAlchemyError

from config import get_config
from nvregsim.core.database import configure_database, init_db
from nvregsim.core.routing import CommandApp
from nvregsim.logging_config import configure_logging
from nvregsim.routes.bench_router import ablate_router, bench_router
from nvregsim.routes.charge_router import router as charge_router
from nvregsim.routes.geometry_router import router as geometry_router
from nvregsim.routes.photophysics_router import router as photophysics_router
from nvregsim.routes.sequence_router import calibrate_router, scan_router, simulate_router

logger = logging.getLogger(__name__)


def create_app(env: Optional[str] = None, ledger: bool = True) -> CommandApp:
    """Create and configure the command application"""
    settings = get_config(env or os.getenv("APP_ENV", "development"))
    configure_logging(settings.LOG_LEVEL, settings.LOG_DIR)

    # Initialize the run ledger; a broken database only costs the ledger
    if ledger:
        configure_database(settings.DATABASE_URL)
        try:
            init_db()
        except SQLAlchemyError as exc:
            logger.warning("run ledger disabled: %s", exc)
            ledger = False

    app = CommandApp(settings, title=settings.APP_TITLE, ledger=ledger)

    # Include routers
    app.include_router(geometry_router, prefix="geometry", help="field geometry from ODMR lines")
    app.include_router(simulate_router, prefix="simulate", help="pulse-level sequence simulations")
    app.include_router(calibrate_router, prefix="calibrate", help="gate calibration")
    app.include_router(scan_router, prefix="scan", help="parameter scans")
    app.include_router(bench_router, prefix="bench", help="repetitive and randomized benchmarking")
    app.include_router(ablate_router, prefix="ablate", help="error-source attribution")
    app.include_router(charge_router, prefix="charge", help="charge-state statistics")
    app.include_router(photophysics_router, prefix="photophysics", help="optical rate model")

    logger.debug("nvregsim %s ready (%s)", settings.APP_VERSION, settings.APP_ENV)
    return app


def main(argv: Optional[Sequence[str]] = None) -> int:
    return create_app().run(argv)


if __name__ == "__main__":
    sys.exit(main())
