# =====================================================
# src/services/llm_gateway.py - Chat-completion providers, transcript, record/replay
# =====================================================
import json
import logging
import threading
from collections import defaultdict, deque
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Deque, Dict, Iterable, List, Optional, Union

import backoff
import httpx
from pydantic import ValidationError

from src.schemas.chat import ChatMessage, ChatRequest, ChatResponse, EndpointRole, TranscriptEntry
from src.schemas.prompting import PromptPayload
from src.schemas.run_config import ProviderConfig, ProviderKind
from .exceptions import (
    GatewayError,
    NonZeroTemperature,
    OutputParseFailure,
    ProviderUnreachable,
    ReplayMiss,
    SchemaError,
    handle_provider_errors,
)
from .metrics import CHAT_FAILURES, CHAT_REQUESTS

logger = logging.getLogger(__name__)


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def build_request(role: EndpointRole, payload: PromptPayload, schema_id: Optional[str]) -> ChatRequest:
    return ChatRequest(
        endpoint_role=role,
        messages=[ChatMessage(**m) for m in payload.as_messages()],
        temperature=0.0,
        response_schema_id=schema_id,
    )


# ==========================================
# TRANSCRIPT
# ==========================================

class Transcript:
    """
    Transcript append-only di una run, persistito come JSON-lines.

    Ogni riga è una TranscriptEntry completa (digest incluso), così il
    file può essere riusato direttamente per il replay.
    """

    def __init__(self, run_id: str, path: Optional[Union[str, Path]] = None):
        self.run_id = run_id
        self.path = Path(path) if path else None
        self.entries: List[TranscriptEntry] = []
        self._lock = threading.Lock()

    def append(self, entry: TranscriptEntry) -> None:
        with self._lock:
            self.entries.append(entry)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(entry.model_dump_json() + "\n")

    def count(self, role: EndpointRole) -> int:
        return sum(1 for e in self.entries if e.request.endpoint_role == role)

    @staticmethod
    def read_entries(path: Union[str, Path]) -> List[TranscriptEntry]:
        entries = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                entries.append(TranscriptEntry.model_validate_json(line))
            except ValidationError as e:
                raise SchemaError(f"{path}:{lineno}: invalid transcript entry") from e
        return entries


# ==========================================
# PROVIDERS
# ==========================================

class HttpChatProvider:
    """Endpoint OpenAI-compatible: POST {base_url}/chat/completions"""

    mode = ProviderKind.LIVE.value

    def __init__(self, role: EndpointRole, config: ProviderConfig, client: Optional[httpx.Client] = None):
        self.role = role.value
        self.config = config
        self._owns_client = client is None
        self.client = client or httpx.Client(timeout=config.timeout_seconds)

    def close(self) -> None:
        """Chiude il client HTTP solo se creato qui"""
        if self._owns_client:
            self.client.close()

    def _headers(self) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        api_key = self.config.api_key()
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        return headers

    def _post(self, body: dict) -> httpx.Response:
        response = self.client.post(
            f"{self.config.base_url.rstrip('/')}/chat/completions",
            json=body,
            headers=self._headers(),
        )
        response.raise_for_status()
        return response

    def _log_retry(self, details: dict) -> None:
        logger.warning(
            f"{self.role}: attempt {details['tries']} failed ({details['exception']!r}), "
            f"retrying in {details['wait']:.1f}s"
        )

    @handle_provider_errors()
    def complete(self, request: ChatRequest) -> ChatResponse:
        body = {
            "model": self.config.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
        }
        # retry solo su errori di trasporto e 429
        post = backoff.on_exception(
            backoff.expo,
            (httpx.TransportError, httpx.HTTPStatusError),
            max_tries=self.config.max_attempts,
            giveup=lambda e: isinstance(e, httpx.HTTPStatusError) and e.response.status_code != 429,
            on_backoff=self._log_retry,
            jitter=None,
            factor=self.config.backoff_factor,
        )(self._post)
        response = post(body)

        try:
            data = response.json()
            text = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise OutputParseFailure(f"{self.role}: unexpected completion payload") from e
        if not text or not text.strip():
            raise OutputParseFailure(f"{self.role}: empty completion")
        return ChatResponse(
            raw_text=text,
            provider_metadata={"model": data.get("model", self.config.model), "usage": data.get("usage", {})},
        )


class ScriptedProvider:
    """Provider mock: restituisce le completion di uno script, in ordine"""

    mode = ProviderKind.MOCK.value

    def __init__(self, role: EndpointRole, responses: Iterable[str]):
        self.role = role.value
        self._responses: Deque[str] = deque(responses)
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, role: EndpointRole, path: Union[str, Path]) -> "ScriptedProvider":
        try:
            responses = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise SchemaError(f"Invalid mock script {path}: {e}") from e
        if not isinstance(responses, list) or not all(isinstance(r, str) for r in responses):
            raise SchemaError(f"Mock script {path} must be a JSON array of strings")
        return cls(role, responses)

    @property
    def remaining(self) -> int:
        return len(self._responses)

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            if not self._responses:
                raise ProviderUnreachable(f"{self.role} mock script exhausted")
            text = self._responses.popleft()
        return ChatResponse(raw_text=text, provider_metadata={"model": "mock"})


class ReplayProvider:
    """
    Risponde con le entry registrate, indicizzate per digest.

    Più entry con lo stesso digest vengono servite nell'ordine di registrazione.
    """

    mode = ProviderKind.REPLAY.value

    def __init__(self, role: EndpointRole, entries: Iterable[TranscriptEntry]):
        self.role = role.value
        self._queues: Dict[str, Deque[TranscriptEntry]] = defaultdict(deque)
        for entry in entries:
            if entry.request.endpoint_role == role:
                self._queues[entry.digest].append(entry)
        self._lock = threading.Lock()
        self.last_timestamp: Optional[str] = None

    def complete(self, request: ChatRequest) -> ChatResponse:
        digest = request.digest()
        with self._lock:
            queue = self._queues.get(digest)
            if not queue:
                raise ReplayMiss(self.role, digest)
            entry = queue.popleft()
            self.last_timestamp = entry.timestamp
        return entry.response


# ==========================================
# GATEWAY
# ==========================================

class ChatGateway:
    """
    Unico punto di contatto con i provider.

    Rifiuta richieste con temperature != 0, registra ogni scambio in
    `exchanges` e, se richiesto, lo appende al transcript della run.
    """

    def __init__(
        self,
        providers: Dict[EndpointRole, object],
        transcript: Optional[Transcript] = None,
        record: bool = False,
        clock: Callable[[], str] = utc_now,
    ):
        self.providers = providers
        self.transcript = transcript
        self.record = record
        self.clock = clock
        self.exchanges: List[TranscriptEntry] = []

    def close(self) -> None:
        for provider in self.providers.values():
            close = getattr(provider, "close", None)
            if close is not None:
                close()

    def __enter__(self) -> "ChatGateway":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def calls(self, role: EndpointRole) -> int:
        return sum(1 for e in self.exchanges if e.request.endpoint_role == role)

    def _should_persist(self, provider) -> bool:
        return provider.mode != ProviderKind.MOCK.value or self.record

    def chat(self, request: ChatRequest) -> ChatResponse:
        role = request.endpoint_role
        if request.temperature != 0:
            CHAT_FAILURES.labels(role=role.value, reason="NonZeroTemperature").inc()
            raise NonZeroTemperature(f"{role.value} request with temperature {request.temperature} rejected")

        provider = self.providers.get(role)
        if provider is None:
            raise ProviderUnreachable(f"No provider configured for role '{role.value}'")

        digest = request.digest()
        CHAT_REQUESTS.labels(role=role.value, mode=provider.mode).inc()
        logger.debug(f"{role.value} request via {provider.mode} provider, digest {digest[:12]}")

        try:
            response = provider.complete(request)
        except GatewayError as e:
            CHAT_FAILURES.labels(role=role.value, reason=type(e).__name__).inc()
            raise

        timestamp = getattr(provider, "last_timestamp", None) or self.clock()
        entry = TranscriptEntry(digest=digest, request=request, response=response, timestamp=timestamp)
        self.exchanges.append(entry)
        if self.transcript is not None and self._should_persist(provider):
            self.transcript.append(entry)
        return response


def build_provider(role: EndpointRole, config: ProviderConfig, replay_entries: Optional[List[TranscriptEntry]] = None):
    """Crea il provider per un ruolo a partire dalla configurazione"""
    if replay_entries is not None or config.kind == ProviderKind.REPLAY:
        if replay_entries is None:
            raise SchemaError(f"{role.value}: replay provider requires a transcript (--replay)")
        return ReplayProvider(role, replay_entries)
    if config.kind == ProviderKind.LIVE:
        if config.api_key_env and not config.api_key():
            raise SchemaError(f"{role.value}: environment variable {config.api_key_env} is not set")
        return HttpChatProvider(role, config)
    if not config.script:
        return ScriptedProvider(role, [])
    return ScriptedProvider.from_file(role, config.script)
