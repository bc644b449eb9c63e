# =====================================================
# src/services/embeddings.py - Embedding backends
# =====================================================
import hashlib
import logging
import re
from typing import List, Optional, Sequence

import httpx
import numpy as np

from src.schemas.evaluation import EmbeddingItem, EmbeddingSet, EvalSide
from src.schemas.run_config import EmbedderKind, EvaluationConfig
from .exceptions import BackendUnreachable

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"[a-z0-9]+")
EMPTY_SENTINEL = "\x00empty"


class HashingEmbedder:
    """
    Embedder deterministico offline: feature hashing dei token.

    Conteggi non firmati in `dimension` bucket (blake2b), poi
    normalizzazione L2. Un testo senza token usa un token sentinella,
    quindi nessun vettore è tutto a zero.
    """

    name = EmbedderKind.HASHING.value

    def __init__(self, dimension: int = 256):
        self.dimension = dimension

    def _bucket(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % self.dimension

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        matrix = np.zeros((len(texts), self.dimension), dtype=float)
        for row, text in enumerate(texts):
            tokens = _TOKEN.findall(text.lower()) or [EMPTY_SENTINEL]
            for token in tokens:
                matrix[row, self._bucket(token)] += 1.0
            matrix[row] /= np.linalg.norm(matrix[row])
        return matrix

    def close(self) -> None:
        pass


class HttpEmbedder:
    """Endpoint OpenAI-compatible: POST {base_url}/embeddings"""

    name = EmbedderKind.HTTP.value

    def __init__(self, base_url: str, model: str, api_key: Optional[str] = None, client: Optional[httpx.Client] = None):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self._owns_client = client is None
        self.client = client or httpx.Client(timeout=60.0)

    def close(self) -> None:
        if self._owns_client:
            self.client.close()

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, 0))
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            response = self.client.post(
                f"{self.base_url}/embeddings",
                json={"model": self.model, "input": list(texts)},
                headers=headers,
            )
            response.raise_for_status()
            data = sorted(response.json()["data"], key=lambda d: d.get("index", 0))
            vectors = np.array([d["embedding"] for d in data], dtype=float)
        except httpx.HTTPError as e:
            raise BackendUnreachable(f"Embedding endpoint unreachable: {e}") from e
        except (ValueError, KeyError, TypeError) as e:
            raise BackendUnreachable(f"Unexpected embedding payload: {e}") from e
        if len(vectors) != len(texts):
            raise BackendUnreachable(f"Embedding endpoint returned {len(vectors)} vectors for {len(texts)} texts")
        return vectors


class SentenceTransformerEmbedder:
    """Modello locale sentence-transformers (requirements-embeddings.txt)"""

    name = EmbedderKind.SENTENCE_TRANSFORMERS.value

    def __init__(self, model: str = "all-MiniLM-L6-v2"):
        self.model_name = model
        self._model = None

    def _load(self):
        if self._model is None:
            try:
                from sentence_transformers import SentenceTransformer
            except ImportError as e:
                raise BackendUnreachable(
                    "sentence-transformers is not installed; install requirements-embeddings.txt"
                ) from e
            self._model = SentenceTransformer(self.model_name)
        return self._model

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, 0))
        model = self._load()
        return np.asarray(
            model.encode(list(texts), convert_to_numpy=True, normalize_embeddings=True, show_progress_bar=False),
            dtype=float,
        )

    def close(self) -> None:
        pass


def build_embedder(config: EvaluationConfig, api_key: Optional[str] = None):
    if config.embedder == EmbedderKind.HTTP:
        return HttpEmbedder(config.embedder_url, config.embedder_model, api_key)
    if config.embedder == EmbedderKind.SENTENCE_TRANSFORMERS:
        return SentenceTransformerEmbedder(config.embedder_model or "all-MiniLM-L6-v2")
    return HashingEmbedder(config.dimension)


def embed(
    texts: Sequence[str],
    backend,
    side: EvalSide = EvalSide.GENERATED,
    originals: Optional[Sequence[str]] = None,
) -> EmbeddingSet:
    """Un vettore per testo; `originals` conserva il testo prima del preprocessing"""
    texts = list(texts)
    originals = list(originals) if originals is not None else texts
    if len(originals) != len(texts):
        raise ValueError("originals and texts must have the same length")
    if not texts:
        return EmbeddingSet(side=side, items=[])

    vectors = backend.embed_texts(texts)
    if len(vectors) != len(texts):
        raise BackendUnreachable(f"{backend.name} returned {len(vectors)} vectors for {len(texts)} texts")
    items: List[EmbeddingItem] = [
        EmbeddingItem(original=o, preprocessed=t, vector=tuple(float(x) for x in v))
        for o, t, v in zip(originals, texts, vectors)
    ]
    logger.debug(f"Embedded {len(items)} {side.value} texts with {backend.name}")
    return EmbeddingSet(side=side, items=items)
