"""monitored trials

Revision ID: 0001
Revises:
Create Date: 2026-10-18
"""
from alembic import op
import sqlalchemy as sa

revision = "0001"
down_revision = None
branch_labels = None
depends_on = None


def upgrade() -> None:
    op.create_table(
        "trials",
        sa.Column("id", sa.Integer(), primary_key=True),
        sa.Column("name", sa.String(), nullable=False),
        sa.Column("model", sa.Enum("NORMAL", "POISSON", name="designmodel"), nullable=False),
        sa.Column("theta0", sa.Float(), nullable=False),
        sa.Column("theta1", sa.Float(), nullable=False),
        sa.Column("g", sa.Float(), nullable=True),
        sa.Column("rho", sa.Float(), nullable=True),
        sa.Column("k0", sa.Float(), nullable=False),
        sa.Column("k1", sa.Float(), nullable=False),
        sa.Column("burn_in_events", sa.Integer(), nullable=False),
        sa.Column("max_events", sa.Integer(), nullable=True),
        sa.Column("created_at", sa.DateTime(timezone=True), server_default=sa.func.now(), nullable=False),
        sa.Column("updated_at", sa.DateTime(timezone=True), nullable=True),
    )
    op.create_index("ix_trials_id", "trials", ["id"])

    op.create_table(
        "trial_records",
        sa.Column("id", sa.Integer(), primary_key=True),
        sa.Column("trial_id", sa.Integer(), sa.ForeignKey("trials.id"), nullable=False),
        sa.Column("sequence", sa.Integer(), nullable=False),
        sa.Column("subject_id", sa.String(), nullable=False),
        sa.Column("time", sa.Float(), nullable=False),
        sa.Column("event", sa.Integer(), nullable=False),
        sa.Column("group", sa.Integer(), nullable=False),
        sa.Column("created_at", sa.DateTime(timezone=True), server_default=sa.func.now(), nullable=False),
        sa.UniqueConstraint("trial_id", "subject_id", name="uq_trial_subject"),
    )
    op.create_index("ix_trial_records_id", "trial_records", ["id"])
    op.create_index("ix_trial_records_trial_id", "trial_records", ["trial_id"])


def downgrade() -> None:
    op.drop_index("ix_trial_records_trial_id", table_name="trial_records")
    op.drop_index("ix_trial_records_id", table_name="trial_records")
    op.drop_table("trial_records")
    op.drop_index("ix_trials_id", table_name="trials")
    op.drop_table("trials")
    sa.Enum(name="designmodel").drop(op.get_bind(), checkfirst=True)
