# =====================================================
# src/services/structured_output.py - Structured output and critique parsing
# =====================================================
import json
import logging
import re
from typing import Any, Dict, List

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from src.schemas.chat import Critique
from src.schemas.goal_model import Actor, ApiMapping
from .exceptions import CritiqueParseFailure, OutputParseFailure

logger = logging.getLogger(__name__)


class HighLevelItem(BaseModel):
    """Goal high-level come restituito dal generator"""
    model_config = ConfigDict(frozen=True)

    actor: str = Field(..., min_length=1)
    text: str = Field(..., min_length=1)


class LowLevelItem(BaseModel):
    model_config = ConfigDict(frozen=True)

    parent: int
    text: str = Field(..., min_length=1)


ACTOR_LIST = "actor_list"
HIGH_LEVEL_GOALS = "high_level_goals"
LOW_LEVEL_GOALS = "low_level_goals"
CRITIQUE = "critique"
API_MAPPINGS = "api_mappings"

SCHEMAS: Dict[str, TypeAdapter] = {
    ACTOR_LIST: TypeAdapter(List[Actor]),
    HIGH_LEVEL_GOALS: TypeAdapter(List[HighLevelItem]),
    LOW_LEVEL_GOALS: TypeAdapter(List[LowLevelItem]),
    CRITIQUE: TypeAdapter(Critique),
    API_MAPPINGS: TypeAdapter(List[ApiMapping]),
}

_FENCE = re.compile(r"```[A-Za-z0-9_-]*")
_SCORE = re.compile(r"score[\s:*_\"']*(-?\d+(?:[.,]\d+)?)(\s*/\s*10)?", re.IGNORECASE)
_COMMENT = re.compile(r"comment[\s:*_\"']*(.*)", re.IGNORECASE | re.DOTALL)


def _json_documents(text: str) -> List[Any]:
    """Tutti i documenti JSON top-level (oggetti o array) presenti nel testo"""
    decoder = json.JSONDecoder()
    documents = []
    idx = 0
    while idx < len(text):
        if text[idx] in "[{":
            try:
                doc, end = decoder.raw_decode(text, idx)
                documents.append(doc)
                idx = end
                continue
            except json.JSONDecodeError:
                pass
        idx += 1
    return documents


def parse_structured_output(raw_text: str, schema_id: str) -> Any:
    """
    Estrae il valore tipizzato dall'output del modello.

    Prosa e code fences attorno al JSON sono tollerati; serve però
    esattamente un documento (distinto) conforme allo schema.
    """
    adapter = SCHEMAS.get(schema_id)
    if adapter is None:
        raise ValueError(f"Unknown schema id: {schema_id}")

    conforming = {}
    for doc in _json_documents(_FENCE.sub("", raw_text or "")):
        try:
            value = adapter.validate_python(doc)
        except ValidationError:
            continue
        conforming.setdefault(json.dumps(doc, sort_keys=True, ensure_ascii=False), value)

    if not conforming:
        raise OutputParseFailure(f"No JSON document conforming to '{schema_id}' found")
    if len(conforming) > 1:
        raise OutputParseFailure(f"{len(conforming)} different documents conform to '{schema_id}'")
    return next(iter(conforming.values()))


def parse_critique(raw_text: str) -> Critique:
    """Critique in forma JSON o testuale ('Score: X/10 Comment: ...')"""
    try:
        return parse_structured_output(raw_text, CRITIQUE)
    except OutputParseFailure:
        pass

    text = _FENCE.sub("", raw_text or "")
    match = _SCORE.search(text)
    if match is None:
        raise CritiqueParseFailure("No score found in critic reply")

    score = float(match.group(1).replace(",", "."))
    if not 0.0 <= score <= 10.0:
        raise CritiqueParseFailure(f"Score {score:g} outside [0, 10]")

    comment_match = _COMMENT.search(text, match.end())
    if comment_match:
        comment = comment_match.group(1)
    else:
        comment = text[match.end():]
    comment = comment.strip().strip("*").strip()
    return Critique(score=score, comment=comment)
