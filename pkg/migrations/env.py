"""Alembic configuration for the run-ledger database."""
import os
from logging.config import fileConfig
from dotenv import load_dotenv

from sqlalchemy import create_engine

from alembic import context

load_dotenv()

config = context.config

if config.config_file_name is not None:
    fileConfig(config.config_file_name)

import sys
from pathlib import Path

# migrations/ is loaded by path; put the project root on sys.path for `nvregsim`
project_root = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(project_root))

from nvregsim.core.database import Base
import nvregsim.models  # noqa: F401

target_metadata = Base.metadata


def _database_url() -> str:
    return os.getenv('DATABASE_URL', config.get_main_option('sqlalchemy.url'))


def run_migrations_offline() -> None:
    """Emit SQL for the ledger schema without a connection."""
    context.configure(url=_database_url(), target_metadata=target_metadata, literal_binds=True)
    with context.begin_transaction():
        context.run_migrations()


def run_migrations_online() -> None:
    connectable = create_engine(_database_url())

    with connectable.connect() as connection:
        context.configure(
            connection=connection, target_metadata=target_metadata, render_as_batch=True
        )

        with context.begin_transaction():
            context.run_migrations()


if context.is_offline_mode():
    run_migrations_offline()
else:
    run_migrations_online()
