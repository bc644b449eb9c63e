# =====================================================
# src/schemas/chat.py - Chat-completion request/response and transcripts
# =====================================================
from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import List, Dict, Any, Optional
from enum import Enum
import hashlib
import json


class EndpointRole(str, Enum):
    GENERATOR = "generator"
    CRITIC = "critic"


class ChatMessage(BaseModel):
    model_config = ConfigDict(frozen=True)

    role: str
    content: str

    @field_validator("role")
    @classmethod
    def validate_role(cls, v: str) -> str:
        allowed = ["system", "user", "assistant"]
        if v not in allowed:
            raise ValueError(f"role must be one of: {allowed}")
        return v


class ChatRequest(BaseModel):
    """
    Richiesta verso un provider.

    La temperature non è validata qui: il gateway rifiuta le richieste
    con temperature != 0 prima dell'invio.
    """
    model_config = ConfigDict(frozen=True)

    endpoint_role: EndpointRole
    messages: List[ChatMessage]
    temperature: float = 0.0
    response_schema_id: Optional[str] = None

    def digest(self) -> str:
        """Digest di (role, testo completo dei messaggi) per il matching in replay"""
        material = json.dumps(
            {
                "role": self.endpoint_role.value,
                "messages": [[m.role, m.content] for m in self.messages],
            },
            ensure_ascii=False,
            separators=(",", ":"),
        )
        return hashlib.sha256(material.encode("utf-8")).hexdigest()


class ChatResponse(BaseModel):
    model_config = ConfigDict(frozen=True)

    raw_text: str
    provider_metadata: Dict[str, Any] = Field(default_factory=dict)


class TranscriptEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    schema_version: int = 1
    digest: str
    request: ChatRequest
    response: ChatResponse
    timestamp: str


class Critique(BaseModel):
    """Score 0-10 + commento del critic"""
    model_config = ConfigDict(frozen=True)

    score: float = Field(..., ge=0.0, le=10.0)
    comment: str = ""
