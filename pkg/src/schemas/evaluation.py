# =====================================================
# src/schemas/evaluation.py - Embeddings, matching and metric reports
# =====================================================
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import List, Optional, Dict, Tuple
from enum import Enum

import numpy as np

from .goal_model import SCHEMA_VERSION


class EvalSide(str, Enum):
    GENERATED = "generated"   # X
    REFERENCE = "reference"   # Y


class EvalTask(str, Enum):
    """Task valutati: actors sui nomi, HL/LL sui testi preprocessati"""
    ACTORS = "Actors"
    HIGH_LEVEL = "HL"
    LOW_LEVEL = "LL"


class EmbeddingItem(BaseModel):
    model_config = ConfigDict(frozen=True)

    original: str
    preprocessed: str
    vector: Tuple[float, ...]


class EmbeddingSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    side: EvalSide
    items: List[EmbeddingItem] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_dimension(self):
        dims = {len(item.vector) for item in self.items}
        if len(dims) > 1:
            raise ValueError(f"embedding dimensions differ within one set: {sorted(dims)}")
        return self

    @property
    def dimension(self) -> Optional[int]:
        return len(self.items[0].vector) if self.items else None

    def __len__(self) -> int:
        return len(self.items)

    def as_array(self) -> np.ndarray:
        if not self.items:
            return np.zeros((0, 0))
        return np.array([item.vector for item in self.items], dtype=float)


class SimilarityMatrix(BaseModel):
    """Righe = elementi generati, colonne = elementi di riferimento"""
    model_config = ConfigDict(frozen=True)

    n_rows: int = Field(..., ge=0)
    n_cols: int = Field(..., ge=0)
    values: List[List[float]] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_shape(self):
        if len(self.values) != self.n_rows or any(len(row) != self.n_cols for row in self.values):
            raise ValueError(f"values do not match shape {self.n_rows}x{self.n_cols}")
        return self

    @classmethod
    def from_array(cls, array: np.ndarray) -> "SimilarityMatrix":
        array = np.asarray(array, dtype=float)
        if array.ndim != 2:
            raise ValueError("similarity matrix must be two-dimensional")
        rows, cols = array.shape
        return cls(n_rows=rows, n_cols=cols, values=array.tolist())

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float).reshape(self.n_rows, self.n_cols)


class MatchingArc(BaseModel):
    model_config = ConfigDict(frozen=True)

    generated: int = Field(..., ge=0)
    reference: int = Field(..., ge=0)
    similarity: float


class MatchingResult(BaseModel):
    """Archi del matching più gli elementi rimasti senza coppia"""
    model_config = ConfigDict(frozen=True)

    arcs: List[MatchingArc] = Field(default_factory=list)
    unmatched_generated: List[int] = Field(default_factory=list)
    unmatched_reference: List[int] = Field(default_factory=list)

    @property
    def total_weight(self) -> float:
        return float(sum(arc.similarity for arc in self.arcs))

    def pairs(self) -> List[Tuple[int, int]]:
        return [(arc.generated, arc.reference) for arc in self.arcs]


class TaskMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    recall: float
    precision: float
    f1: float


class EvalRow(BaseModel):
    """Una cella (dataset, task, strategy, critic) con la sua provenance"""
    model_config = ConfigDict(frozen=True)

    dataset_id: str
    task: EvalTask
    strategy: str
    critic_enabled: bool
    size_generated: int = Field(..., ge=0)
    size_reference: int = Field(..., ge=0)
    metrics: TaskMetrics
    matching: MatchingResult
    generated: List[str] = Field(default_factory=list)
    reference: List[str] = Field(default_factory=list)

    @property
    def cell(self) -> Tuple[str, str, str]:
        return (self.dataset_id, self.task.value, self.strategy)


class EvalReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    schema_version: int = SCHEMA_VERSION
    metric_convention: str = "generated-recall"
    embedder: str = "hashing"
    rows: List[EvalRow] = Field(default_factory=list)


class ShotSimilarityRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    dataset_id: str
    task: str
    side: str = Field(..., description="generator or critic")
    average: float
    per_example: List[float] = Field(default_factory=list)


class ShotSimilarityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    schema_version: int = SCHEMA_VERSION
    embedder: str = "hashing"
    rows: List[ShotSimilarityRow] = Field(default_factory=list)

    def task_averages(self, side: str) -> Dict[str, float]:
        """Media aritmetica per task tra i dataset ('Average per Task')"""
        grouped: Dict[str, List[float]] = {}
        for row in self.rows:
            if row.side == side:
                grouped.setdefault(row.task, []).append(row.average)
        return {task: float(np.mean(values)) for task, values in grouped.items()}


class AblationRow(BaseModel):
    """Confronto di una cella tra report A (critic on) e B (critic off)"""
    model_config = ConfigDict(frozen=True)

    dataset_id: str
    task: EvalTask
    strategy: str
    a: TaskMetrics
    b: TaskMetrics

    def delta(self, metric: str) -> float:
        return getattr(self.a, metric) - getattr(self.b, metric)
