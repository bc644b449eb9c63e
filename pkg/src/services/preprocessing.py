# =====================================================
# src/services/preprocessing.py - Stopword removal and stemming
# =====================================================
import re
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional, Union

from nltk.stem.porter import PorterStemmer

from src.schemas.run_config import DATA_DIR

DEFAULT_STOPWORDS = DATA_DIR / "stopwords_en.txt"
_TOKEN = re.compile(r"[a-z0-9]+")
_MAX_STEM_ROUNDS = 8


class TextKind(str, Enum):
    ACTOR_NAME = "actor_name"
    GOAL_TEXT = "goal_text"


def load_stopwords(path: Union[str, Path] = DEFAULT_STOPWORDS) -> frozenset:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(line.strip().lower() for line in lines if line.strip() and not line.startswith("#"))


class TextPreprocessor:
    """
    Lowercase, tokenizzazione su caratteri non alfanumerici, rimozione
    stopword e stemming Porter.

    Lo stem è iterato fino al punto fisso e le stopword sono rimosse
    prima e dopo lo stemming: preprocess(preprocess(t)) == preprocess(t).
    """

    def __init__(self, stopwords: Iterable[str]):
        self.stopwords = frozenset(w.lower() for w in stopwords)
        self._stemmer = PorterStemmer()

    @classmethod
    def from_file(cls, path: Union[str, Path] = DEFAULT_STOPWORDS) -> "TextPreprocessor":
        return cls(load_stopwords(path))

    def stem(self, token: str) -> str:
        for _ in range(_MAX_STEM_ROUNDS):
            stemmed = self._stemmer.stem(token)
            if stemmed == token:
                break
            token = stemmed
        return token

    def preprocess(self, text: str, kind: TextKind = TextKind.GOAL_TEXT) -> str:
        if kind == TextKind.ACTOR_NAME:
            return text
        tokens = [t for t in _TOKEN.findall(text.lower()) if t not in self.stopwords]
        stems = [self.stem(t) for t in tokens]
        return " ".join(s for s in stems if s and s not in self.stopwords)


@lru_cache(maxsize=1)
def default_preprocessor() -> TextPreprocessor:
    return TextPreprocessor.from_file()


def preprocess_text(text: str, kind: TextKind, preprocessor: Optional[TextPreprocessor] = None) -> str:
    return (preprocessor or default_preprocessor()).preprocess(text, kind)
