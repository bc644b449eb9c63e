# =====================================================
# src/services/unit_of_work.py - Registry transactions
# =====================================================
import logging
from contextlib import contextmanager
from typing import Iterator

from sqlalchemy.orm import Session

from .repository_factory import RepositoryFactory

logger = logging.getLogger(__name__)


class UnitOfWork:
    """
    I repository fanno flush; la transazione fa commit o rollback per intero.

    Usage:
        with UnitOfWork(db).transaction() as uow:
            uow.repositories.runs.mark_completed(manifest)
            uow.repositories.evaluations.record_rows(run_id, rows, "generated-recall", "hashing")
    """

    def __init__(self, db: Session):
        self.db = db
        self.repositories = RepositoryFactory(db)

    @contextmanager
    def transaction(self) -> Iterator["UnitOfWork"]:
        try:
            yield self
            self.db.commit()
        except Exception as e:
            logger.warning(f"Registry transaction rolled back: {e}")
            self.db.rollback()
            raise
