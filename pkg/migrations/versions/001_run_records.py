"""Run ledger

Revision ID: 001_run_records
Revises: 
Create Date: 2026-10-18 00:00:00.000000

"""
from alembic import op
import sqlalchemy as sa


# revision identifiers, used by Alembic.
revision = '001_run_records'
down_revision = None
branch_labels = None
depends_on = None


def upgrade():
    op.create_table(
        'run_records',
        sa.Column('id', sa.Integer(), nullable=False),
        sa.Column('run_id', sa.String(64), nullable=False),
        sa.Column('command', sa.String(128), nullable=False),
        sa.Column('status', sa.String(16), nullable=False),
        sa.Column('config_hash', sa.String(64), nullable=True),
        sa.Column('seed', sa.Integer(), nullable=True),
        sa.Column('step_density', sa.Float(), nullable=True),
        sa.Column('summary_path', sa.String(1024), nullable=True),
        sa.Column('error_code', sa.String(64), nullable=True),
        sa.Column('notes', sa.Text(), nullable=True),
        sa.Column('created_at', sa.DateTime(), nullable=True),
        sa.Column('completed_at', sa.DateTime(), nullable=True),
        sa.PrimaryKeyConstraint('id')
    )
    op.create_index(op.f('ix_run_records_run_id'), 'run_records', ['run_id'], unique=True)
    op.create_index(op.f('ix_run_records_command'), 'run_records', ['command'], unique=False)
    op.create_index(op.f('ix_run_records_config_hash'), 'run_records', ['config_hash'], unique=False)


def downgrade():
    op.drop_index(op.f('ix_run_records_config_hash'), table_name='run_records')
    op.drop_index(op.f('ix_run_records_command'), table_name='run_records')
    op.drop_index(op.f('ix_run_records_run_id'), table_name='run_records')
    op.drop_table('run_records')
