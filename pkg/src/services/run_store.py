# =====================================================
# src/services/run_store.py - Run directory layout and artifact I/O
# =====================================================
import json
import logging
import uuid
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

from pydantic import ValidationError

from src.schemas.goal_model import SCHEMA_VERSION, ApiMapping, GoalModel
from src.schemas.pipeline import PipelineResult
from src.schemas.prompting import ShotStrategy
from src.schemas.run import RunManifest
from .exceptions import MissingArtifact, SchemaError
from .ground_truth import load_goal_model, serialize_goal_model

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
GOAL_MODEL = "goal_model.json"
API_MAPPINGS = "api_mappings.json"
STAGE_RESULTS = "stage_results.json"
TRANSCRIPT = "transcript.jsonl"


def _dumps(payload: Any) -> bytes:
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def new_run_id(dataset_id: str, strategy: ShotStrategy, critic_enabled: bool) -> str:
    suffix = "critic" if critic_enabled else "nocritic"
    return f"{dataset_id}-{strategy.short.lower()}-{suffix}-{uuid.uuid4().hex[:8]}"


def serialize_api_mappings(mappings: List[ApiMapping]) -> bytes:
    return _dumps({"schema_version": SCHEMA_VERSION, "mappings": [m.model_dump(mode="json") for m in mappings]})


def parse_api_mappings(file_bytes: bytes) -> List[ApiMapping]:
    try:
        raw = json.loads(file_bytes.decode("utf-8"))
        return [ApiMapping.model_validate(m) for m in raw["mappings"]]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValidationError) as e:
        raise SchemaError(f"Malformed api_mappings document: {e}") from e


class RunStore:
    """
    Artefatti di una run sotto <out>/<run_id>/.

    goal_model.json, api_mappings.json e stage_results.json non contengono
    il run_id né timestamp di sistema: a parità di transcript sono
    byte-identici tra replay.
    """

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)

    def run_dir(self, run_id: str) -> Path:
        return self.out_dir / run_id

    def create_run_dir(self, run_id: str) -> Path:
        path = self.run_dir(run_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        # run_id unico per output root
        path.mkdir(exist_ok=False)
        return path

    def transcript_path(self, run_id: str) -> Path:
        return self.run_dir(run_id) / TRANSCRIPT

    # ==========================================
    # WRITE
    # ==========================================

    def _write(self, run_dir: Path, name: str, data: bytes) -> None:
        (run_dir / name).write_bytes(data)
        logger.debug(f"Wrote {run_dir.name}/{name} ({len(data)} bytes)")

    def write_result(self, run_id: str, result: PipelineResult) -> Dict[str, str]:
        """Scrive gli output (anche parziali) e ritorna la mappa degli artefatti"""
        run_dir = self.run_dir(run_id)
        self._write(run_dir, GOAL_MODEL, serialize_goal_model(result.goal_model))
        self._write(run_dir, API_MAPPINGS, serialize_api_mappings(result.api_mappings))
        stages = {name: stage.summary() for name, stage in result.stage_results.items()}
        self._write(run_dir, STAGE_RESULTS, _dumps({
            "schema_version": SCHEMA_VERSION,
            "description": result.description,
            "completed_phases": [p.value for p in result.completed_phases],
            "stages": stages,
        }))
        artifacts = {"goal_model": GOAL_MODEL, "api_mappings": API_MAPPINGS, "stage_results": STAGE_RESULTS}
        if self.transcript_path(run_id).exists():
            artifacts["transcript"] = TRANSCRIPT
        return artifacts

    def checkpoint_writer(self, run_id: str) -> Callable[[PipelineResult], None]:
        """Callback per l'orchestrator: persiste gli output dopo ogni fase"""
        def checkpoint(result: PipelineResult) -> None:
            self.write_result(run_id, result)
        return checkpoint

    def write_manifest(self, manifest: RunManifest) -> Path:
        path = self.run_dir(manifest.run_id) / MANIFEST
        path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    # ==========================================
    # READ
    # ==========================================

    @staticmethod
    def resolve_manifest_path(location: Union[str, Path]) -> Path:
        path = Path(location)
        if path.is_dir():
            path = path / MANIFEST
        if not path.exists():
            raise MissingArtifact(f"Run manifest not found: {path}")
        return path

    @classmethod
    def load_manifest(cls, location: Union[str, Path]) -> RunManifest:
        path = cls.resolve_manifest_path(location)
        try:
            return RunManifest.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as e:
            raise SchemaError(f"{path}: invalid run manifest") from e

    @classmethod
    def load_goal_model(cls, location: Union[str, Path]) -> GoalModel:
        manifest_path = cls.resolve_manifest_path(location)
        manifest = cls.load_manifest(manifest_path)
        name = manifest.artifacts.get("goal_model")
        if not name or not (manifest_path.parent / name).exists():
            raise MissingArtifact(f"Run {manifest.run_id} has no goal model artifact")
        return load_goal_model(manifest_path.parent / name)

    @classmethod
    def load_api_mappings(cls, location: Union[str, Path]) -> Optional[List[ApiMapping]]:
        manifest_path = cls.resolve_manifest_path(location)
        name = cls.load_manifest(manifest_path).artifacts.get("api_mappings")
        if not name or not (manifest_path.parent / name).exists():
            return None
        return parse_api_mappings((manifest_path.parent / name).read_bytes())
