# =====================================================
# test/conftest.py - Shared pytest configuration
# =====================================================
"""
Configurazione condivisa per tutti i test.

Mette la root del progetto nel path, fornisce un registry SQLite in
memoria e le factory per provider scriptati e pipeline offline.
"""

import sys
from pathlib import Path

# Add project root to Python path for all tests
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import pytest
from sqlalchemy.orm import sessionmaker

# Import ALL models to ensure they're registered with SQLAlchemy
from src.models import BaseModel
from src.database.connection import create_registry_engine
from src.schemas.chat import EndpointRole
from src.schemas.pipeline import LoopConfig
from src.schemas.prompting import ShotStrategy
from src.schemas.run_config import DATA_DIR, PathsConfig, ProviderConfig, ProvidersConfig, RunConfig
from src.services.llm_gateway import ChatGateway, ScriptedProvider, Transcript
from src.services.orchestrator import Orchestrator
from src.services.prompting import PromptBuilder

# =====================================================
# REGISTRY
# =====================================================

@pytest.fixture(scope="function")
def test_engine():
    engine = create_registry_engine("sqlite://")
    BaseModel.metadata.create_all(engine)
    yield engine
    BaseModel.metadata.drop_all(engine)
    engine.dispose()


@pytest.fixture(scope="function")
def test_db(test_engine):
    """Sessione pulita su un registry SQLite in memoria"""
    TestSession = sessionmaker(bind=test_engine)
    session = TestSession()
    yield session
    session.close()


# =====================================================
# BUNDLED DATA
# =====================================================

@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def prompt_builder(data_dir) -> PromptBuilder:
    return PromptBuilder.from_paths(data_dir / "templates", data_dir / "shot_examples.json")


# =====================================================
# SCRIPTED PIPELINES
# =====================================================

@pytest.fixture
def make_gateway():
    """Gateway con provider mock: liste di completion per generator e critic"""
    def factory(generator=(), critic=(), transcript: Transcript = None, record: bool = False, clock=None):
        providers = {
            EndpointRole.GENERATOR: ScriptedProvider(EndpointRole.GENERATOR, list(generator)),
            EndpointRole.CRITIC: ScriptedProvider(EndpointRole.CRITIC, list(critic)),
        }
        kwargs = {"transcript": transcript, "record": record}
        if clock is not None:
            kwargs["clock"] = clock
        return ChatGateway(providers, **kwargs)
    return factory


@pytest.fixture
def make_orchestrator(make_gateway, prompt_builder):
    def factory(generator=(), critic=(), config: LoopConfig = None, checkpoint=None):
        gateway = make_gateway(generator, critic)
        return Orchestrator(gateway, prompt_builder, config or LoopConfig(), checkpoint=checkpoint)
    return factory


@pytest.fixture
def fixed_clock():
    """Clock deterministico: un secondo in più a ogni chiamata"""
    state = {"tick": 0}

    def clock() -> str:
        state["tick"] += 1
        return f"2026-01-01T00:00:{state['tick']:02d}+00:00"
    return clock


@pytest.fixture
def mock_run_config(tmp_path, data_dir):
    """RunConfig offline per london_ambulance con gli script mock inclusi"""
    def factory(strategy: ShotStrategy = ShotStrategy.FEW_SHOT, critic_enabled: bool = True) -> RunConfig:
        mock_dir = data_dir / "mock"
        return RunConfig(
            providers=ProvidersConfig(
                generator=ProviderConfig(kind="mock", script=str(mock_dir / "london_ambulance.generator.json")),
                critic=ProviderConfig(kind="mock", script=str(mock_dir / "london_ambulance.critic.json")),
            ),
            loop=LoopConfig(strategy=strategy, critic_enabled=critic_enabled),
            paths=PathsConfig(),
        )
    return factory


# =====================================================
# EVALUATION ROWS
# =====================================================

@pytest.fixture
def make_eval_row():
    """EvalRow con metriche date e un matching vuoto"""
    from src.schemas.evaluation import EvalRow, EvalTask, MatchingResult, TaskMetrics

    def factory(dataset_id, task, strategy, precision, recall, f1, critic_enabled=True):
        return EvalRow(
            dataset_id=dataset_id,
            task=EvalTask(task),
            strategy=strategy,
            critic_enabled=critic_enabled,
            size_generated=1,
            size_reference=1,
            metrics=TaskMetrics(precision=precision, recall=recall, f1=f1),
            matching=MatchingResult(),
        )
    return factory


@pytest.fixture
def make_manifest():
    """RunManifest minimale; i campi si sovrascrivono per keyword"""
    from src.schemas.run import RunManifest

    def factory(run_id="london_ambulance-fs-critic-0001", **overrides):
        data = dict(
            run_id=run_id,
            dataset_id="london_ambulance",
            strategy="few-shot",
            critic_enabled=True,
            quality_threshold=8.5,
            max_iterations=3,
            generator_mode="mock",
            critic_mode="mock",
            started_at="2026-01-01T00:00:00+00:00",
        )
        data.update(overrides)
        return RunManifest(**data)
    return factory
