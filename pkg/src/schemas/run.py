# =====================================================
# src/schemas/run.py - Run manifest
# =====================================================
from pydantic import BaseModel, ConfigDict, Field
from typing import Dict, Optional
from enum import Enum

from .goal_model import SCHEMA_VERSION


class RunStatus(str, Enum):
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class RunManifest(BaseModel):
    """
    Descrive una run persistita sotto <out>/<run_id>/.

    È l'unico artefatto che contiene il run_id: goal_model.json,
    api_mappings.json e i report restano indipendenti dalla run.
    """
    model_config = ConfigDict(frozen=True)

    schema_version: int = SCHEMA_VERSION
    run_id: str = Field(..., min_length=1)
    dataset_id: str
    strategy: str
    critic_enabled: bool
    keep: str = "last"
    quality_threshold: float
    max_iterations: int
    generator_mode: str
    critic_mode: str
    status: RunStatus = RunStatus.RUNNING
    failed_phase: Optional[str] = None
    started_at: str
    finished_at: Optional[str] = None
    artifacts: Dict[str, str] = Field(default_factory=dict, description="Artifact name -> file name in the run directory")
