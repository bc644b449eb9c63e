# =====================================================
# src/schemas/pipeline.py - Loop configuration and stage results
# =====================================================
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Any, Dict, List, Optional
from enum import Enum

from .chat import Critique, TranscriptEntry
from .goal_model import ApiMapping, GoalModel
from .prompting import ShotStrategy, Task


class KeepPolicy(str, Enum):
    LAST = "last"
    BEST = "best"


class PipelinePhase(str, Enum):
    """Fasi in ordine di esecuzione"""
    PREPROCESS = "preprocess"
    ACTORS = "actors"
    HIGH_LEVEL = "high_level"
    LOW_LEVEL = "low_level"
    API_MAPPING = "api_mapping"

    @property
    def number(self) -> int:
        return list(PipelinePhase).index(self) + 1

    @property
    def task(self) -> Task:
        return Task(self.value)


class LoopConfig(BaseModel):
    """Parametri del feedback loop generator-critic"""
    model_config = ConfigDict(frozen=True)

    quality_threshold: float = Field(default=8.5, ge=0.0, le=10.0)
    max_iterations: int = Field(default=3, ge=1)
    strategy: ShotStrategy = ShotStrategy.ZERO_SHOT
    critic_enabled: bool = True
    temperature: float = 0.0
    keep: KeepPolicy = KeepPolicy.LAST

    @field_validator("temperature")
    @classmethod
    def validate_temperature(cls, v: float) -> float:
        if v != 0:
            raise ValueError("temperature is fixed at 0")
        return v


class StageResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    task: Task
    output: Any
    iterations_used: int = Field(..., ge=1)
    final_score: Optional[float] = None
    converged: bool
    critiques: List[Critique] = Field(default_factory=list)
    started_at: Optional[str] = None
    finished_at: Optional[str] = None

    @model_validator(mode="after")
    def validate_critique_count(self):
        if self.critiques and len(self.critiques) != self.iterations_used:
            raise ValueError("critiques must have one entry per iteration")
        return self

    def summary(self) -> dict:
        """Forma serializzabile per stage_results.json (senza l'output)"""
        return {
            "task": self.task.value,
            "iterations_used": self.iterations_used,
            "final_score": self.final_score,
            "converged": self.converged,
            "critiques": [c.model_dump() for c in self.critiques],
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }


class PipelineResult(BaseModel):
    """Output (anche parziale) di run_pipeline; completed_phases elenca le fasi concluse"""
    model_config = ConfigDict(frozen=True)

    description: Optional[str] = None
    goal_model: GoalModel
    api_mappings: List[ApiMapping] = Field(default_factory=list)
    stage_results: Dict[str, StageResult] = Field(default_factory=dict)
    transcript: List[TranscriptEntry] = Field(default_factory=list)
    completed_phases: List[PipelinePhase] = Field(default_factory=list)
