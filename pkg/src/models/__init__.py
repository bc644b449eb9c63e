# =====================================================
# src/models/__init__.py
# =====================================================
"""
Models package initialization.

Tutti i modelli vanno importati qui per registrarli nei metadata
(create_all e risoluzione delle foreign key).
"""

from .base import BaseModel
from .run import RunRecord
from .evaluation import EvaluationRecord

__all__ = [
    "BaseModel",
    "RunRecord",
    "EvaluationRecord",
]
