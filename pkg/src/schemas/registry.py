# =====================================================
# src/schemas/registry.py - Registry API response models
# =====================================================
from pydantic import BaseModel, ConfigDict
from typing import Any, Dict, List, Optional
from datetime import datetime


class RunSummary(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    run_id: str
    dataset_id: str
    strategy: str
    critic_enabled: bool
    status: str
    failed_phase: Optional[str] = None
    started_at: datetime
    finished_at: Optional[datetime] = None


class RunDetail(RunSummary):
    keep: str
    quality_threshold: float
    max_iterations: int
    artifact_dir: str
    error_message: Optional[str] = None
    manifest: Dict[str, Any]


class EvaluationOut(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    task: str
    precision: float
    recall: float
    f1: float
    size_generated: int
    size_reference: int
    metric_convention: str
    embedder: str


class RunList(BaseModel):
    runs: List[RunSummary]
    count: int


class BestEvaluationOut(EvaluationOut):
    run_id: str


class AblationPairOut(BaseModel):
    """Ultima run completata con e senza critic per una strategy"""
    strategy: str
    with_critic: Optional[str] = None
    without_critic: Optional[str] = None
