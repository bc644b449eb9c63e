# =====================================================
# src/repositories/__init__.py - Export tutti i repository
# =====================================================

from .base import BaseRepository
from .run_repository import RunRepository
from .evaluation_repository import EvaluationRepository

__all__ = [
    "BaseRepository",
    "RunRepository",
    "EvaluationRepository",
]
