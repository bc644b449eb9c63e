# =====================================================
# src/services/repository_factory.py - Dependency Injection Helper
# =====================================================
from sqlalchemy.orm import Session

from ..repositories import RunRepository
from ..repositories import EvaluationRepository

class RepositoryFactory:
    """Factory per creare i repository del registry su una sessione condivisa"""

    def __init__(self, db: Session):
        self.db = db

    @property
    def runs(self) -> RunRepository:
        return RunRepository(self.db)

    @property
    def evaluations(self) -> EvaluationRepository:
        return EvaluationRepository(self.db)
