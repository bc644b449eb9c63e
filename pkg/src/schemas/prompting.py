# =====================================================
# src/schemas/prompting.py - Prompt payloads, shot examples, strategies
# =====================================================
from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Optional
from enum import Enum


class Task(str, Enum):
    """Task per cui esistono template e shot examples"""
    PREPROCESS = "preprocess"
    ACTORS = "actors"
    HIGH_LEVEL = "high_level"
    LOW_LEVEL = "low_level"
    CRITIQUE = "critique"
    API_MAPPING = "api_mapping"

    @property
    def label(self) -> str:
        return {
            Task.PREPROCESS: "project description",
            Task.ACTORS: "actors",
            Task.HIGH_LEVEL: "high-level goals",
            Task.LOW_LEVEL: "low-level goals",
            Task.CRITIQUE: "critique",
            Task.API_MAPPING: "API mappings",
        }[self]


# Stage con feedback loop generator-critic
LOOP_TASKS = (Task.ACTORS, Task.HIGH_LEVEL, Task.LOW_LEVEL)


class ShotStrategy(str, Enum):
    ZERO_SHOT = "zero-shot"
    ONE_SHOT = "one-shot"
    FEW_SHOT = "few-shot"

    @property
    def example_count(self) -> int:
        return {ShotStrategy.ZERO_SHOT: 0, ShotStrategy.ONE_SHOT: 1, ShotStrategy.FEW_SHOT: 3}[self]

    @property
    def short(self) -> str:
        return {ShotStrategy.ZERO_SHOT: "ZS", ShotStrategy.ONE_SHOT: "OS", ShotStrategy.FEW_SHOT: "FS"}[self]


class ShotExample(BaseModel):
    """Esempio curato da iniettare nei prompt del generator o del critic"""
    model_config = ConfigDict(frozen=True)

    task: Task
    source_name: str = Field(..., min_length=1, description="Project the example was adapted from")
    input_payload: str = Field(..., min_length=1)
    expected_output: str = Field(..., min_length=1)
    score_and_comment: Optional[str] = Field(None, description="Critique examples only")
    critiqued_task: Optional[Task] = Field(None, description="Stage judged by a critique example")

    @model_validator(mode="after")
    def validate_critique_fields(self):
        if self.task == Task.CRITIQUE:
            if not self.score_and_comment:
                raise ValueError("critique examples require score_and_comment")
            if self.critiqued_task not in LOOP_TASKS:
                raise ValueError(f"critique examples must name a critiqued_task among {[t.value for t in LOOP_TASKS]}")
        else:
            if self.score_and_comment is not None:
                raise ValueError("generation examples must not carry score_and_comment")
            if self.critiqued_task is not None:
                raise ValueError("generation examples must not carry critiqued_task")
        return self

    @property
    def similarity_text(self) -> str:
        """Testo usato per l'analisi di similarità (input + output)"""
        return "\n".join(part for part in (self.input_payload, self.expected_output) if part)


class PromptPayload(BaseModel):
    model_config = ConfigDict(frozen=True)

    task: Task
    system_text: str
    user_text: str
    embedded_examples: int = Field(..., ge=0)
    includes_prior_critique: bool = False

    @model_validator(mode="after")
    def validate_example_count(self):
        if self.embedded_examples not in (0, 1, 3):
            raise ValueError("embedded_examples must be 0, 1 or 3")
        return self

    def as_messages(self) -> list:
        return [
            {"role": "system", "content": self.system_text},
            {"role": "user", "content": self.user_text},
        ]


class PromptTemplate(BaseModel):
    """Template caricato da file: una sezione system e una user"""
    model_config = ConfigDict(frozen=True)

    task: Task
    system: str
    user: str
