import logging
import logging.handlers
import os

LOG_FORMAT = "%(asctime)s %(levelname)-8s [%(name)s] %(message)s"


def configure_logging(log_level: str | int = None, log_dir: str | None = None, console: bool = True) -> None:
    """Root logger with a stderr handler and a rotating ``nvregsim.log``.

    ``log_level`` accepts names ('DEBUG') or logging constants and defaults to
    ``LOG_LEVEL``; ``log_dir`` defaults to ``LOG_DIR`` or ./logs.
    """
    if log_level is None:
        log_level = os.getenv("LOG_LEVEL", "INFO")
    if isinstance(log_level, str):
        log_level = getattr(logging, log_level.upper(), logging.INFO)
    if log_dir is None:
        log_dir = os.getenv("LOG_DIR") or os.path.join(os.getcwd(), "logs")

    os.makedirs(log_dir, exist_ok=True)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    for h in list(root_logger.handlers):
        root_logger.removeHandler(h)
        h.close()

    formatter = logging.Formatter(LOG_FORMAT)
    if console:
        # stderr keeps stdout free for JSON printed by commands
        ch = logging.StreamHandler()
        ch.setLevel(log_level)
        ch.setFormatter(formatter)
        root_logger.addHandler(ch)

    fh = logging.handlers.RotatingFileHandler(
        os.path.join(log_dir, "nvregsim.log"), maxBytes=5 * 1024 * 1024, backupCount=3, encoding="utf-8"
    )
    fh.setLevel(log_level)
    fh.setFormatter(formatter)
    root_logger.addHandler(fh)

    for name in ("alembic", "sqlalchemy", "sqlalchemy.engine", "sqlalchemy.engine.Engine"):
        logging.getLogger(name).setLevel(logging.WARN)
