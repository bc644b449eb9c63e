# =====================================================
# src/repositories/run_repository.py
# =====================================================
from typing import Dict, List, Optional, Tuple
from sqlalchemy.orm import Session
from sqlalchemy import and_, desc
from datetime import datetime

from src.database.exceptions import DuplicateEntityError, EntityNotFoundError, handle_database_errors
from src.models.run import RunRecord
from src.schemas.run import RunManifest
from .base import BaseRepository


def _parse_timestamp(value: Optional[str]) -> Optional[datetime]:
    return datetime.fromisoformat(value) if value else None


class RunRepository(BaseRepository[RunRecord]):
    """Repository per le run registrate"""

    def __init__(self, db: Session):
        super().__init__(RunRecord, db)

    @handle_database_errors("Run")
    def register(self, manifest: RunManifest, artifact_dir: str) -> RunRecord:
        """Registra una run; il run_id deve essere nuovo"""
        if self.get_by_run_id(manifest.run_id) is not None:
            raise DuplicateEntityError(f"Run {manifest.run_id} is already registered")
        return self.create({
            "run_id": manifest.run_id,
            "dataset_id": manifest.dataset_id,
            "strategy": manifest.strategy,
            "critic_enabled": manifest.critic_enabled,
            "keep": manifest.keep,
            "quality_threshold": manifest.quality_threshold,
            "max_iterations": manifest.max_iterations,
            "status": manifest.status.value,
            "failed_phase": manifest.failed_phase,
            "artifact_dir": artifact_dir,
            "started_at": _parse_timestamp(manifest.started_at),
            "finished_at": _parse_timestamp(manifest.finished_at),
            "manifest": manifest.model_dump(mode="json"),
        })

    def _require(self, run_id: str) -> RunRecord:
        record = self.get_by_run_id(run_id)
        if record is None:
            raise EntityNotFoundError(f"Run {run_id} not found")
        return record

    @handle_database_errors("Run")
    def mark_completed(self, manifest: RunManifest) -> RunRecord:
        record = self._require(manifest.run_id)
        return self.update(record.id, {
            "status": "completed",
            "failed_phase": None,
            "finished_at": _parse_timestamp(manifest.finished_at),
            "manifest": manifest.model_dump(mode="json"),
        })

    @handle_database_errors("Run")
    def mark_failed(self, run_id: str, phase: Optional[str], message: str = "",
                    manifest: Optional[RunManifest] = None) -> RunRecord:
        record = self._require(run_id)
        update = {"status": "failed", "failed_phase": phase, "error_message": message or None}
        if manifest is not None:
            update["finished_at"] = _parse_timestamp(manifest.finished_at)
            update["manifest"] = manifest.model_dump(mode="json")
        return self.update(record.id, update)

    def get_by_run_id(self, run_id: str) -> Optional[RunRecord]:
        return self.find_one(run_id=run_id)

    def list_runs(self, dataset_id: Optional[str] = None, strategy: Optional[str] = None,
                  limit: int = 100) -> List[RunRecord]:
        query = self.db.query(RunRecord)
        if dataset_id:
            query = query.filter(RunRecord.dataset_id == dataset_id)
        if strategy:
            query = query.filter(RunRecord.strategy == strategy)
        return query.order_by(desc(RunRecord.started_at), RunRecord.run_id).limit(limit).all()

    def get_ablation_pairs(self, dataset_id: str) -> Dict[str, Tuple[Optional[RunRecord], Optional[RunRecord]]]:
        """
        Per ogni strategy: (ultima run completata con critic, ultima senza).
        """
        completed = self.db.query(RunRecord).filter(
            and_(RunRecord.dataset_id == dataset_id, RunRecord.status == "completed")
        ).order_by(desc(RunRecord.started_at)).all()

        pairs: Dict[str, Tuple[Optional[RunRecord], Optional[RunRecord]]] = {}
        for record in completed:
            with_critic, without_critic = pairs.get(record.strategy, (None, None))
            if record.critic_enabled and with_critic is None:
                with_critic = record
            elif not record.critic_enabled and without_critic is None:
                without_critic = record
            pairs[record.strategy] = (with_critic, without_critic)
        return pairs
