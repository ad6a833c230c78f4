"""Word vectors, sentence vectors and TF-IDF / n-gram document statistics."""

from __future__ import annotations

import hashlib
import logging
import math
import threading
from collections import Counter, OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol

import numpy as np
import requests

from .corpus import Article, Sentence

logger = logging.getLogger(__name__)

CHAR_NGRAM_SIZE = 4


class EmbeddingError(Exception):
    """Fatal problem loading or serving vectors."""


class SentenceProviderError(EmbeddingError):
    """Typed error for a failing remote sentence-vector endpoint."""


@dataclass
class WordVectorStore:
    """Immutable token -> vector table; shareable read-only."""

    dimension: int
    vectors: dict[str, np.ndarray]
    _units: dict[str, np.ndarray | None] = field(default_factory=dict, repr=False)

    def lookup(self, token: str, lowercase_fallback: bool = False) -> np.ndarray | None:
        vector = self.vectors.get(token)
        if vector is None and lowercase_fallback:
            vector = self.vectors.get(token.lower())
        return vector

    def unit(self, token: str) -> np.ndarray | None:
        """Unit-normalized vector, or None for misses and zero vectors."""
        if token in self._units:
            return self._units[token]
        vector = self.vectors.get(token)
        if vector is None:
            result = None
        else:
            norm = float(np.linalg.norm(vector))
            result = vector / norm if norm > 0 else None
        self._units[token] = result
        return result


def load_word_vectors(path: str | Path) -> WordVectorStore:
    """Load the standard text format: header "count dim", then one
    "token v1 ... vdim" line per word.  Duplicate tokens: last wins."""
    path = Path(path)
    with path.open(encoding="utf-8") as handle:
        header = handle.readline().split()
        if len(header) != 2:
            raise EmbeddingError(f"{path}: malformed header {header!r}")
        count, dim = int(header[0]), int(header[1])
        vectors: dict[str, np.ndarray] = {}
        for line_no, line in enumerate(handle, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise EmbeddingError(
                    f"{path}:{line_no}: expected {dim} components, got {len(parts) - 1}"
                )
            token = parts[0]
            vector = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            if not np.all(np.isfinite(vector)):
                raise EmbeddingError(f"{path}:{line_no}: non-finite component")
            if token in vectors:
                logger.warning("%s:%d: duplicate token %r, last wins", path, line_no, token)
            vectors[token] = vector
    if len(vectors) != count:
        logger.warning("%s: header count %d but %d unique tokens", path, count, len(vectors))
    return WordVectorStore(dimension=dim, vectors=vectors)


def lookup(store: WordVectorStore, token: str, lowercase_fallback: bool = False):
    return store.lookup(token, lowercase_fallback=lowercase_fallback)


def sentence_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class SentenceVectorProvider(Protocol):
    def get(self, text: str) -> np.ndarray | None:
        """Vector for a sentence text, or None on a miss."""


class SentenceVectorTable:
    """File-table provider: one record per line,
    "sha256(sentence-text) TAB v1 ... vdim"."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        self.vectors = vectors

    @classmethod
    def from_file(cls, path: str | Path) -> "SentenceVectorTable":
        vectors: dict[str, np.ndarray] = {}
        for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            key, _, rest = line.partition("\t")
            vector = np.array([float(x) for x in rest.split()], dtype=np.float64)
            if vector.size == 0 or not np.all(np.isfinite(vector)):
                raise EmbeddingError(f"{path}:{line_no}: bad sentence vector")
            vectors[key] = vector
        return cls(vectors)

    @classmethod
    def from_texts(cls, pairs: Iterable[tuple[str, np.ndarray]]) -> "SentenceVectorTable":
        return cls({sentence_key(text): np.asarray(vec, dtype=np.float64) for text, vec in pairs})

    def get(self, text: str) -> np.ndarray | None:
        return self.vectors.get(sentence_key(text))

    def write(self, path: str | Path) -> None:
        lines = []
        for key in sorted(self.vectors):
            values = " ".join(f"{x:.6f}" for x in self.vectors[key])
            lines.append(f"{key}\t{values}\n")
        Path(path).write_text("".join(lines), encoding="utf-8")


class RemoteSentenceVectors:
    """HTTP provider: POST ``/embed`` with ``{"sentences": [...]}``.

    Responses are cached in a bounded LRU keyed by sentence hash; the cache
    is safe under concurrent readers and writers.
    """

    def __init__(self, base_url: str, cache_size: int = 4096, session=None, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.cache_size = cache_size
        self.timeout = timeout
        self._session = session or requests.Session()
        self._cache: OrderedDict[str, np.ndarray] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, text: str) -> np.ndarray | None:
        key = sentence_key(text)
        with self._lock:
            if key in self._cache:
                self._cache.move_to_end(key)
                return self._cache[key]
        vector = self.get_batch([text])[0]
        if vector is not None:
            with self._lock:
                self._cache[key] = vector
                while len(self._cache) > self.cache_size:
                    self._cache.popitem(last=False)
        return vector

    def get_batch(self, texts: list[str]) -> list[np.ndarray | None]:
        response = self._session.post(
            f"{self.base_url}/embed", json={"sentences": texts}, timeout=self.timeout
        )
        if response.status_code != 200:
            raise SentenceProviderError(
                f"embedding endpoint returned status {response.status_code}"
            )
        payload = response.json()
        vectors = payload.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise SentenceProviderError("embedding endpoint returned a malformed body")
        return [np.array(v, dtype=np.float64) if v is not None else None for v in vectors]


@dataclass
class TfidfStats:
    """Document frequencies with the article as document unit."""

    document_count: int
    document_frequency: dict[str, int]
    term_kind: str  # "word" | "char4gram"

    def __post_init__(self) -> None:
        for term, df in self.document_frequency.items():
            if not 1 <= df <= self.document_count:
                raise ValueError(f"df out of range for term {term!r}: {df}")

    def idf(self, term: str) -> float:
        df = self.document_frequency.get(term)
        if df is None:
            # Unseen term: smoothed as if rarer than everything observed.
            return math.log(self.document_count + 1)
        return math.log(self.document_count / df)


def char_ngrams(stream: str, n: int = CHAR_NGRAM_SIZE) -> list[str]:
    """Length-n substrings of the space-joined token stream, no padding;
    grams span word boundaries."""
    if len(stream) < n:
        return []
    return [stream[i : i + n] for i in range(len(stream) - n + 1)]


def sentence_terms(sentence: Sentence, term_kind: str) -> list[str]:
    if term_kind == "word":
        return list(sentence.tokens)
    if term_kind == "char4gram":
        return char_ngrams(sentence.char_stream)
    raise ValueError(f"unknown term kind {term_kind!r}")


def build_tfidf(articles: Iterable[Article], term_kind: str) -> TfidfStats:
    """Document frequencies over the full corpus, both language tiers.

    Articles must already be preprocessed (tokens / char_stream filled).
    """
    df: Counter[str] = Counter()
    document_count = 0
    for article in articles:
        document_count += 1
        seen: set[str] = set()
        for sentence in article.sentences:
            seen.update(sentence_terms(sentence, term_kind))
        df.update(seen)
    if document_count == 0:
        raise EmbeddingError("cannot build TF-IDF statistics from an empty corpus")
    return TfidfStats(
        document_count=document_count, document_frequency=dict(df), term_kind=term_kind
    )


def tfidf_weight(stats: TfidfStats, term: str, sentence: Sentence) -> float:
    """tf(term, sentence) * ln(N / df(term)); raw term counts, natural log."""
    tf = sentence_terms(sentence, stats.term_kind).count(term)
    if tf == 0:
        return 0.0
    return tf * stats.idf(term)
