# Alembic migration versions
