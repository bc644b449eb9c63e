"""001_create_run_registry

Revision ID: 001
Revises:
Create Date: 2026-10-19 10:00:00.000000

Crea le tabelle del run registry:
- runs (una riga per run, metadati del manifest)
- evaluations (precision/recall/F1 per task di una run)
"""
from alembic import op
import sqlalchemy as sa

# revision identifiers
revision = '001'
down_revision = None
branch_labels = None
depends_on = None

def upgrade() -> None:
    """Crea runs ed evaluations"""

    # =====================================================
    # 1. RUNS
    # =====================================================
    op.create_table(
        'runs',
        sa.Column('id', sa.Uuid(as_uuid=True), primary_key=True),
        sa.Column('run_id', sa.String(120), nullable=False),
        sa.Column('dataset_id', sa.String(100), nullable=False),
        sa.Column('strategy', sa.String(20), nullable=False),
        sa.Column('critic_enabled', sa.Boolean, nullable=False),
        sa.Column('keep', sa.String(10), nullable=False),
        sa.Column('quality_threshold', sa.Float, nullable=False),
        sa.Column('max_iterations', sa.Integer, nullable=False),
        sa.Column('status', sa.String(20), nullable=False),
        sa.Column('failed_phase', sa.String(30), nullable=True),
        sa.Column('error_message', sa.Text, nullable=True),
        sa.Column('artifact_dir', sa.String(500), nullable=False),
        sa.Column('started_at', sa.DateTime(timezone=True), nullable=False),
        sa.Column('finished_at', sa.DateTime(timezone=True), nullable=True),
        sa.Column('manifest', sa.JSON, nullable=False),
        sa.Column('created_at', sa.DateTime, nullable=False, server_default=sa.func.now()),
        sa.Column('updated_at', sa.DateTime, nullable=False, server_default=sa.func.now()),
        sa.CheckConstraint("status IN ('running', 'completed', 'failed')", name='ck_runs_status'),
        sa.CheckConstraint('max_iterations >= 1', name='ck_runs_max_iterations'),
    )
    op.create_index('ix_runs_run_id', 'runs', ['run_id'], unique=True)
    op.create_index('ix_runs_dataset_id', 'runs', ['dataset_id'])
    op.create_index('ix_runs_strategy', 'runs', ['strategy'])
    op.create_index('ix_runs_status', 'runs', ['status'])

    # =====================================================
    # 2. EVALUATIONS
    # =====================================================
    op.create_table(
        'evaluations',
        sa.Column('id', sa.Uuid(as_uuid=True), primary_key=True),
        sa.Column('run_id', sa.String(120), sa.ForeignKey('runs.run_id', ondelete='CASCADE'), nullable=False),
        sa.Column('task', sa.String(10), nullable=False),
        sa.Column('precision', sa.Float, nullable=False),
        sa.Column('recall', sa.Float, nullable=False),
        sa.Column('f1', sa.Float, nullable=False),
        sa.Column('size_generated', sa.Integer, nullable=False),
        sa.Column('size_reference', sa.Integer, nullable=False),
        sa.Column('metric_convention', sa.String(20), nullable=False),
        sa.Column('embedder', sa.String(50), nullable=False),
        sa.Column('created_at', sa.DateTime, nullable=False, server_default=sa.func.now()),
        sa.Column('updated_at', sa.DateTime, nullable=False, server_default=sa.func.now()),
        sa.CheckConstraint("task IN ('Actors', 'HL', 'LL')", name='ck_evaluations_task'),
    )
    op.create_index('ix_evaluations_run_id', 'evaluations', ['run_id'])
    op.create_index('ix_evaluations_task', 'evaluations', ['task'])

def downgrade() -> None:
    op.drop_index('ix_evaluations_task', table_name='evaluations')
    op.drop_index('ix_evaluations_run_id', table_name='evaluations')
    op.drop_table('evaluations')
    op.drop_index('ix_runs_status', table_name='runs')
    op.drop_index('ix_runs_strategy', table_name='runs')
    op.drop_index('ix_runs_dataset_id', table_name='runs')
    op.drop_index('ix_runs_run_id', table_name='runs')
    op.drop_table('runs')
