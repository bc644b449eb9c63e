# =====================================================
# src/services/ground_truth.py - Ground-truth parsing and goal-model validation
# =====================================================
import json
import logging
from pathlib import Path
from typing import List, Union, Optional, Dict, Any

from pydantic import ValidationError

from src.schemas.goal_model import (
    Actor,
    ApiEndpoint,
    Goal,
    GoalLevel,
    GoalModel,
    GoalModelDocument,
    GroundTruthDataset,
    GroundTruthDocument,
    ProjectDescription,
    SCHEMA_VERSION,
)
from .exceptions import SchemaError, IntegrityError

logger = logging.getLogger(__name__)

ModelLike = Union[GoalModel, GroundTruthDataset]


def _dumps(payload: Dict[str, Any]) -> bytes:
    # indent + ensure_ascii=False: output stabile e leggibile, byte-identico tra run
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _decode(file_bytes: bytes) -> Any:
    try:
        return json.loads(file_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SchemaError(f"Not a UTF-8 JSON document: {e}") from e


# ==========================================
# VALIDATION
# ==========================================

def validate_goal_model(model: ModelLike) -> List[str]:
    """
    Ritorna una entry per ogni invariante violata; lista vuota se il modello è valido.

    Non solleva mai eccezioni: le violazioni sono dati.
    """
    violations: List[str] = []

    seen: Dict[str, str] = {}
    for actor in model.actors:
        key = actor.name.casefold()
        if key in seen:
            violations.append(f"duplicate actor name: '{seen[key]}' / '{actor.name}'")
        else:
            seen[key] = actor.name

    for i, goal in enumerate(model.high_level):
        if goal.level != GoalLevel.HIGH:
            violations.append(f"wrong level: high_level[{i}] is {goal.level.value}")
        if not goal.actor_ref or goal.actor_ref.casefold() not in seen:
            violations.append(f"unknown actor_ref: high_level[{i}] -> '{goal.actor_ref}'")

    for i, goal in enumerate(model.low_level):
        if goal.level != GoalLevel.LOW:
            violations.append(f"wrong level: low_level[{i}] is {goal.level.value}")
        if goal.parent_ref is None or not 0 <= goal.parent_ref < len(model.high_level):
            violations.append(f"dangling parent_ref: low_level[{i}] -> {goal.parent_ref}")

    return violations


# ==========================================
# GROUND TRUTH
# ==========================================

def _build_goals(doc) -> Dict[str, Any]:
    actors = [Actor(name=a.name, description=a.description) for a in doc.actors]
    high_level = [Goal(text=g.text, level=GoalLevel.HIGH, actor_ref=g.actor) for g in doc.high_level]
    low_level = [Goal(text=g.text, level=GoalLevel.LOW, parent_ref=g.parent) for g in doc.low_level]
    return {"actors": actors, "high_level": high_level, "low_level": low_level}


def parse_ground_truth(file_bytes: bytes) -> GroundTruthDataset:
    """Parse + validazione di un documento di ground truth"""
    raw = _decode(file_bytes)
    try:
        doc = GroundTruthDocument.model_validate(raw)
    except ValidationError as e:
        raise SchemaError(f"Malformed ground-truth document: {e.errors()[0]['msg']}") from e

    try:
        dataset = GroundTruthDataset(dataset_id=doc.dataset_id, **_build_goals(doc))
    except ValidationError as e:
        # parent negativo, testo vuoto, ...
        if any(err["loc"] and "parent_ref" in map(str, err["loc"]) for err in e.errors()):
            raise IntegrityError(f"Invalid parent reference: {e.errors()[0]['msg']}") from e
        raise SchemaError(f"Invalid ground-truth content: {e.errors()[0]['msg']}") from e

    violations = validate_goal_model(dataset)
    if violations:
        raise IntegrityError(f"Dataset '{dataset.dataset_id}': " + "; ".join(violations))

    logger.debug(f"Loaded ground truth {dataset.dataset_id}: {dataset.counts()}")
    return dataset


def serialize_ground_truth(dataset: GroundTruthDataset) -> bytes:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "dataset_id": dataset.dataset_id,
        "actors": [{"name": a.name, "description": a.description} for a in dataset.actors],
        "high_level": [{"text": g.text, "actor": g.actor_ref} for g in dataset.high_level],
        "low_level": [{"text": g.text, "parent": g.parent_ref} for g in dataset.low_level],
    }
    return _dumps(payload)


def load_ground_truth(path: Union[str, Path]) -> GroundTruthDataset:
    return parse_ground_truth(Path(path).read_bytes())


def load_all_ground_truth(datasets_dir: Union[str, Path]) -> Dict[str, GroundTruthDataset]:
    """Carica tutte le fixture *.json di una directory, indicizzate per dataset_id"""
    datasets = {}
    for path in sorted(Path(datasets_dir).glob("*.json")):
        dataset = load_ground_truth(path)
        datasets[dataset.dataset_id] = dataset
    return datasets


# ==========================================
# RUN OUTPUT (goal_model.json)
# ==========================================

def serialize_goal_model(model: GoalModel) -> bytes:
    payload: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "project_id": model.project_id,
        "actors": [{"name": a.name, "description": a.description} for a in model.actors],
        "high_level": [{"text": g.text, "actor": g.actor_ref} for g in model.high_level],
        "low_level": [{"text": g.text, "parent": g.parent_ref} for g in model.low_level],
        "provenance": model.provenance.model_dump(mode="json") if model.provenance else None,
    }
    return _dumps(payload)


def parse_goal_model(file_bytes: bytes) -> GoalModel:
    raw = _decode(file_bytes)
    try:
        doc = GoalModelDocument.model_validate(raw)
        return GoalModel(project_id=doc.project_id, provenance=doc.provenance, **_build_goals(doc))
    except ValidationError as e:
        raise SchemaError(f"Malformed goal model document: {e.errors()[0]['msg']}") from e


def load_goal_model(path: Union[str, Path]) -> GoalModel:
    return parse_goal_model(Path(path).read_bytes())


def find_dataset_file(datasets_dir: Union[str, Path], dataset_id: str) -> Optional[Path]:
    candidate = Path(datasets_dir) / f"{dataset_id}.json"
    return candidate if candidate.exists() else None


# ==========================================
# PROJECT INPUTS
# ==========================================

def load_project(projects_dir: Union[str, Path], project_id: str) -> ProjectDescription:
    """Descrizione o README di un caso di studio (<projects_dir>/<id>.json)"""
    path = Path(projects_dir) / f"{project_id}.json"
    if not path.exists():
        raise SchemaError(f"Unknown dataset '{project_id}': {path} not found")
    raw = _decode(path.read_bytes())
    try:
        return ProjectDescription.model_validate(raw)
    except ValidationError as e:
        raise SchemaError(f"{path}: {e.errors()[0]['msg']}") from e


def load_all_projects(projects_dir: Union[str, Path]) -> Dict[str, ProjectDescription]:
    return {p.stem: load_project(projects_dir, p.stem) for p in sorted(Path(projects_dir).glob("*.json"))}


def load_api_catalogue(catalogues_dir: Union[str, Path], project_id: str) -> List[ApiEndpoint]:
    """Endpoint disponibili per la Phase 5; lista vuota se il progetto non ha catalogo"""
    path = Path(catalogues_dir) / f"{project_id}.json"
    if not path.exists():
        return []
    raw = _decode(path.read_bytes())
    if not isinstance(raw, list):
        raise SchemaError(f"{path}: API catalogue must be a JSON array")
    try:
        endpoints = [ApiEndpoint.model_validate(item) for item in raw]
    except ValidationError as e:
        raise SchemaError(f"{path}: {e.errors()[0]['msg']}") from e
    names = [e.name for e in endpoints]
    if len(set(names)) != len(names):
        raise IntegrityError(f"{path}: duplicate endpoint names")
    return endpoints
