# =====================================================
# src/models/run.py - Registered pipeline runs
# =====================================================
from sqlalchemy import String, Boolean, Float, Integer, Text, JSON, DateTime, CheckConstraint
from sqlalchemy.orm import Mapped, mapped_column, relationship
from datetime import datetime
from typing import Optional, Dict, Any, List

from .base import BaseModel

from typing import TYPE_CHECKING
if TYPE_CHECKING:
    from .evaluation import EvaluationRecord

RUN_STATUSES = ("running", "completed", "failed")

class RunRecord(BaseModel):
    """
    Una run della pipeline, indicizzata per run_id.

    Gli artefatti restano su file (artifact_dir); qui vivono solo i
    metadati del manifest per interrogare le run per dataset/strategy.
    """

    __tablename__ = "runs"

    run_id: Mapped[str] = mapped_column(String(120), unique=True, index=True)
    dataset_id: Mapped[str] = mapped_column(String(100), index=True)
    strategy: Mapped[str] = mapped_column(String(20), index=True)
    critic_enabled: Mapped[bool] = mapped_column(Boolean, default=True)
    keep: Mapped[str] = mapped_column(String(10), default="last")
    quality_threshold: Mapped[float] = mapped_column(Float)
    max_iterations: Mapped[int] = mapped_column(Integer)

    status: Mapped[str] = mapped_column(String(20), default="running", index=True)
    failed_phase: Mapped[Optional[str]] = mapped_column(String(30), nullable=True)
    error_message: Mapped[Optional[str]] = mapped_column(Text, nullable=True)

    artifact_dir: Mapped[str] = mapped_column(String(500))
    started_at: Mapped[datetime] = mapped_column(DateTime(timezone=True))
    finished_at: Mapped[Optional[datetime]] = mapped_column(DateTime(timezone=True), nullable=True)
    manifest: Mapped[Dict[str, Any]] = mapped_column(JSON, default=dict)

    evaluations: Mapped[List["EvaluationRecord"]] = relationship(
        "EvaluationRecord",
        back_populates="run",
        cascade="all, delete-orphan",
        passive_deletes=True,
    )

    __table_args__ = (
        CheckConstraint(f"status IN {RUN_STATUSES}", name="ck_runs_status"),
        CheckConstraint("max_iterations >= 1", name="ck_runs_max_iterations"),
    )

    @property
    def is_finished(self) -> bool:
        return self.status != "running"
