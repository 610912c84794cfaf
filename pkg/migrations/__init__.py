# Alembic migration scripts
