# =====================================================
# src/schemas/goal_model.py - Domain types: actors, goals, goal models
# =====================================================
from pydantic import BaseModel, ConfigDict, Field, AliasChoices, field_validator, model_validator
from typing import Optional, List, Dict, Any
from enum import Enum

SCHEMA_VERSION = 1


class GoalLevel(str, Enum):
    HIGH = "High"
    LOW = "Low"


class ProjectDescription(BaseModel):
    """Input di una run: descrizione in linguaggio naturale e/o README grezzo"""
    model_config = ConfigDict(frozen=True)

    project_id: str = Field(..., min_length=1, description="Project identifier")
    raw_readme: Optional[str] = Field(None, description="Raw README text")
    description: Optional[str] = Field(None, description="Natural-language project description")

    @model_validator(mode="after")
    def validate_has_text(self):
        has_description = self.description is not None and self.description.strip() != ""
        has_readme = self.raw_readme is not None and self.raw_readme.strip() != ""
        if self.description is not None and not has_description:
            raise ValueError("description must be non-empty after trimming")
        if not has_description and not has_readme:
            raise ValueError("either description or raw_readme is required")
        return self

    @property
    def needs_preprocessing(self) -> bool:
        """Phase 1 runs iff the description is absent"""
        return self.description is None


class Actor(BaseModel):
    """Active entity carrying actions: the 'who'"""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    name: str = Field(..., description="Short actor name")
    description: str = Field(
        default="",
        validation_alias=AliasChoices("description", "descr"),
        description="Short actor description",
    )

    @field_validator("name")
    @classmethod
    def validate_name(cls, v: str) -> str:
        v = v.strip()
        if not v:
            raise ValueError("actor name must be non-empty")
        return v


class Goal(BaseModel):
    """High-level or low-level goal"""
    model_config = ConfigDict(frozen=True)

    text: str = Field(..., description="Goal sentence")
    level: GoalLevel
    actor_ref: Optional[str] = Field(None, description="Actor name (High only)")
    parent_ref: Optional[int] = Field(None, ge=0, description="Index of the parent high-level goal (Low only)")

    @field_validator("text")
    @classmethod
    def validate_text(cls, v: str) -> str:
        v = v.strip()
        if not v:
            raise ValueError("goal text must be non-empty")
        return v

    @model_validator(mode="after")
    def validate_refs(self):
        if self.level == GoalLevel.HIGH and not self.actor_ref:
            raise ValueError("high-level goals require actor_ref")
        if self.level == GoalLevel.LOW and self.parent_ref is None:
            raise ValueError("low-level goals require parent_ref")
        return self


class StageProvenance(BaseModel):
    """Provenance di uno stage: iterazioni e timestamp presi dal transcript"""
    model_config = ConfigDict(frozen=True)

    iterations_used: int = Field(..., ge=0)
    final_score: Optional[float] = None
    converged: bool = True
    started_at: Optional[str] = None
    finished_at: Optional[str] = None


class RunProvenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    strategy: str
    critic_enabled: bool
    keep: str = "last"
    quality_threshold: float
    max_iterations: int
    stages: Dict[str, StageProvenance] = Field(default_factory=dict)


class GoalModel(BaseModel):
    """Cumulative output of a pipeline run (phases 2-4)"""
    model_config = ConfigDict(frozen=True)

    project_id: str
    actors: List[Actor] = Field(default_factory=list)
    high_level: List[Goal] = Field(default_factory=list)
    low_level: List[Goal] = Field(default_factory=list)
    provenance: Optional[RunProvenance] = None

    def counts(self) -> Dict[str, int]:
        return {"actors": len(self.actors), "HL": len(self.high_level), "LL": len(self.low_level)}


class GroundTruthDataset(BaseModel):
    """Annotazioni di riferimento per un caso di studio"""
    model_config = ConfigDict(frozen=True)

    dataset_id: str = Field(..., min_length=1)
    actors: List[Actor]
    high_level: List[Goal]
    low_level: List[Goal]

    def counts(self) -> Dict[str, int]:
        return {"actors": len(self.actors), "HL": len(self.high_level), "LL": len(self.low_level)}

    def as_goal_model(self) -> GoalModel:
        return GoalModel(
            project_id=self.dataset_id,
            actors=self.actors,
            high_level=self.high_level,
            low_level=self.low_level,
        )


class ApiEndpoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1, description="Operation identifier, e.g. insertUsingPOST")
    method: str = Field(..., description="HTTP verb")
    path: str
    description: str = ""

    @field_validator("method")
    @classmethod
    def validate_method(cls, v: str) -> str:
        allowed = ["GET", "POST", "PUT", "PATCH", "DELETE", "HEAD", "OPTIONS"]
        v = v.upper()
        if v not in allowed:
            raise ValueError(f"method must be one of: {allowed}")
        return v


class ApiMapping(BaseModel):
    model_config = ConfigDict(frozen=True)

    high_level_goal: str = ""
    low_level_goal: str = Field(..., min_length=1)
    api_name: str = Field(..., min_length=1)


# Wire shapes of the ground-truth / run-output JSON documents

class ActorDocument(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    name: str
    description: str = Field(default="", validation_alias=AliasChoices("description", "descr"))


class HighLevelDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str
    actor: str


class LowLevelDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str
    parent: int


class GroundTruthDocument(BaseModel):
    """Schema del file JSON di ground truth"""
    model_config = ConfigDict(extra="forbid")

    dataset_id: str = Field(..., min_length=1)
    actors: List[ActorDocument] = Field(..., min_length=1)
    high_level: List[HighLevelDocument] = Field(..., min_length=1)
    low_level: List[LowLevelDocument] = Field(..., min_length=1)
    schema_version: int = SCHEMA_VERSION


class GoalModelDocument(BaseModel):
    """Schema di goal_model.json: stessa forma della ground truth + project_id e provenance"""
    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    project_id: str
    actors: List[ActorDocument] = Field(default_factory=list)
    high_level: List[HighLevelDocument] = Field(default_factory=list)
    low_level: List[LowLevelDocument] = Field(default_factory=list)
    provenance: Optional[Dict[str, Any]] = None
