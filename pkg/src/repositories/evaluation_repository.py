# =====================================================
# src/repositories/evaluation_repository.py
# =====================================================
from typing import List, Optional, Sequence
from sqlalchemy.orm import Session
from sqlalchemy import desc

from src.database.exceptions import EntityNotFoundError, handle_database_errors
from src.models.evaluation import EvaluationRecord
from src.models.run import RunRecord
from src.schemas.evaluation import EvalRow
from .base import BaseRepository


class EvaluationRepository(BaseRepository[EvaluationRecord]):
    """Repository per le metriche per task delle run"""

    def __init__(self, db: Session):
        super().__init__(EvaluationRecord, db)

    @handle_database_errors("Evaluation")
    def record_rows(self, run_id: str, rows: Sequence[EvalRow], convention: str,
                    embedder: str) -> List[EvaluationRecord]:
        """
        Salva le righe di una valutazione.

        Una nuova valutazione con la stessa convenzione ed embedder
        sostituisce la precedente.
        """
        if self.db.query(RunRecord.id).filter_by(run_id=run_id).first() is None:
            raise EntityNotFoundError(f"Run {run_id} not found")

        self.delete_where(run_id=run_id, metric_convention=convention, embedder=embedder)

        return self.create_many(
            {
                "run_id": run_id,
                "task": row.task.value,
                "precision": row.metrics.precision,
                "recall": row.metrics.recall,
                "f1": row.metrics.f1,
                "size_generated": row.size_generated,
                "size_reference": row.size_reference,
                "metric_convention": convention,
                "embedder": embedder,
            }
            for row in rows
        )

    def get_by_run(self, run_id: str) -> List[EvaluationRecord]:
        order = {"Actors": 0, "HL": 1, "LL": 2}
        records = self.db.query(EvaluationRecord).filter(EvaluationRecord.run_id == run_id).all()
        return sorted(records, key=lambda r: (r.metric_convention, r.embedder, order.get(r.task, 9)))

    def get_best_by_task(self, task: str, dataset_id: Optional[str] = None) -> Optional[EvaluationRecord]:
        """Valutazione con F1 più alto per un task, opzionalmente ristretta a un dataset"""
        query = self.db.query(EvaluationRecord).filter(EvaluationRecord.task == task)
        if dataset_id:
            query = query.join(RunRecord, RunRecord.run_id == EvaluationRecord.run_id).filter(
                RunRecord.dataset_id == dataset_id
            )
        return query.order_by(desc(EvaluationRecord.f1), EvaluationRecord.run_id).first()
