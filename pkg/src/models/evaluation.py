# =====================================================
# src/models/evaluation.py - Metrics recorded for a run
# =====================================================
from sqlalchemy import String, Float, Integer, ForeignKey, CheckConstraint
from sqlalchemy.orm import Mapped, mapped_column, relationship

from .base import BaseModel

from typing import TYPE_CHECKING
if TYPE_CHECKING:
    from .run import RunRecord

class EvaluationRecord(BaseModel):
    """Precision/recall/F1 di un task (Actors, HL, LL) per una run"""

    __tablename__ = "evaluations"

    run_id: Mapped[str] = mapped_column(
        String(120),
        ForeignKey("runs.run_id", ondelete="CASCADE"),
        index=True
    )
    run: Mapped["RunRecord"] = relationship("RunRecord", back_populates="evaluations")

    task: Mapped[str] = mapped_column(String(10), index=True)
    precision: Mapped[float] = mapped_column(Float)
    recall: Mapped[float] = mapped_column(Float)
    f1: Mapped[float] = mapped_column(Float)
    size_generated: Mapped[int] = mapped_column(Integer, default=0)
    size_reference: Mapped[int] = mapped_column(Integer, default=0)
    metric_convention: Mapped[str] = mapped_column(String(20), default="generated-recall")
    embedder: Mapped[str] = mapped_column(String(50), default="hashing")

    __table_args__ = (
        CheckConstraint("task IN ('Actors', 'HL', 'LL')", name="ck_evaluations_task"),
    )
