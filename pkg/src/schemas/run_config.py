# =====================================================
# src/schemas/run_config.py - Run configuration file
# =====================================================
from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Optional
from enum import Enum
from pathlib import Path
import json
import os

from .pipeline import LoopConfig

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


class ProviderKind(str, Enum):
    LIVE = "live"
    MOCK = "mock"
    REPLAY = "replay"


class MetricConvention(str, Enum):
    GENERATED_RECALL = "generated-recall"
    BERTSCORE = "bertscore"


class EmbedderKind(str, Enum):
    HASHING = "hashing"
    HTTP = "http"
    SENTENCE_TRANSFORMERS = "sentence-transformers"


class ProviderConfig(BaseModel):
    """Configurazione di un endpoint chat-completions (generator o critic)"""
    kind: ProviderKind = ProviderKind.MOCK
    base_url: Optional[str] = Field(None, description="OpenAI-compatible base URL, e.g. https://api.openai.com/v1")
    model: Optional[str] = None
    api_key_env: Optional[str] = Field(None, description="Environment variable holding the API key")
    timeout_seconds: float = Field(default=60.0, gt=0)
    max_attempts: int = Field(default=3, ge=1)
    backoff_factor: float = Field(default=1.0, ge=0)
    script: Optional[str] = Field(None, description="Mock only: JSON array of raw completions")

    @model_validator(mode="after")
    def validate_kind_fields(self):
        if self.kind == ProviderKind.LIVE and (not self.base_url or not self.model):
            raise ValueError("live providers require base_url and model")
        return self

    def api_key(self) -> Optional[str]:
        """Le credenziali arrivano solo da environment"""
        if not self.api_key_env:
            return None
        return os.getenv(self.api_key_env)


class ProvidersConfig(BaseModel):
    generator: ProviderConfig = Field(default_factory=ProviderConfig)
    critic: ProviderConfig = Field(default_factory=ProviderConfig)


class PathsConfig(BaseModel):
    templates_dir: str = str(DATA_DIR / "templates")
    examples_path: str = str(DATA_DIR / "shot_examples.json")
    datasets_dir: str = str(DATA_DIR / "datasets")
    projects_dir: str = str(DATA_DIR / "projects")
    api_catalogues_dir: str = str(DATA_DIR / "api_catalogues")
    stopwords_path: str = str(DATA_DIR / "stopwords_en.txt")


class EvaluationConfig(BaseModel):
    embedder: EmbedderKind = EmbedderKind.HASHING
    embedder_url: Optional[str] = None
    embedder_model: Optional[str] = None
    embedder_api_key_env: Optional[str] = None
    metric_convention: MetricConvention = MetricConvention.GENERATED_RECALL
    dimension: int = Field(default=256, ge=8)

    @model_validator(mode="after")
    def validate_backend(self):
        if self.embedder == EmbedderKind.HTTP and (not self.embedder_url or not self.embedder_model):
            raise ValueError("http embedder requires embedder_url and embedder_model")
        return self


class RunConfig(BaseModel):
    providers: ProvidersConfig = Field(default_factory=ProvidersConfig)
    loop: LoopConfig = Field(default_factory=LoopConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    registry_url: Optional[str] = None

    @field_validator("registry_url")
    @classmethod
    def validate_registry_url(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and "://" not in v:
            raise ValueError("registry_url must be a SQLAlchemy URL")
        return v

    @classmethod
    def load(cls, path: Optional[str]) -> "RunConfig":
        """
        Carica la configurazione da file JSON.

        I path relativi vengono risolti rispetto alla directory del file,
        così una config può vivere accanto ai propri script mock.
        """
        if path is None:
            return cls()
        config_path = Path(path)
        raw = json.loads(config_path.read_text(encoding="utf-8"))
        config = cls.model_validate(raw)
        return config.resolve_paths(config_path.resolve().parent)

    def resolve_paths(self, base: Path) -> "RunConfig":
        def resolve(value: Optional[str]) -> Optional[str]:
            if value is None or Path(value).is_absolute():
                return value
            return str((base / value).resolve())

        paths = PathsConfig(**{k: resolve(v) for k, v in self.paths.model_dump().items()})
        providers = ProvidersConfig(
            generator=self.providers.generator.model_copy(update={"script": resolve(self.providers.generator.script)}),
            critic=self.providers.critic.model_copy(update={"script": resolve(self.providers.critic.script)}),
        )
        return self.model_copy(update={"paths": paths, "providers": providers})
