"""Shared fixture builders for the test suite."""

from __future__ import annotations

import hashlib
import random

import numpy as np

from satzalign.corpus import Article, ArticlePair, Sentence
from satzalign.embeddings import SentenceVectorTable, WordVectorStore

VOCABULARY = [
    "der", "die", "das", "und", "ist", "nicht", "ein", "eine", "Haus", "Hund",
    "Katze", "Kind", "Schule", "Wasser", "Brot", "essen", "trinken", "laufen",
    "schlafen", "sprechen", "gross", "klein", "alt", "neu", "gut", "schlecht",
    "schnell", "langsam", "heute", "morgen", "gestern", "hier", "dort", "viel",
    "wenig", "Mensch", "Stadt", "Land", "Arzt", "Pilot", "Lehrer", "Buch",
    "Tisch", "Stuhl", "Fenster", "Tuer", "Garten", "Strasse", "Auto", "Zug",
]

VECTOR_DIMENSION = 8


def vector_map(seed: int = 7, dim: int = VECTOR_DIMENSION) -> dict[str, list[float]]:
    rng = random.Random(seed)
    return {
        word: [round(rng.uniform(-1.0, 1.0), 6) for _ in range(dim)]
        for word in VOCABULARY
    }


def word_store(seed: int = 7, dim: int = VECTOR_DIMENSION) -> WordVectorStore:
    return WordVectorStore(
        dimension=dim,
        vectors={w: np.array(v, dtype=np.float64) for w, v in vector_map(seed, dim).items()},
    )


def make_sentence(tokens: list[str], index: int = 0, raw_text: str | None = None) -> Sentence:
    return Sentence(
        index=index,
        raw_text=raw_text if raw_text is not None else " ".join(tokens),
        tokens=list(tokens),
        char_stream=" ".join(tokens),
    )


def random_tokens(rng: random.Random, low: int = 1, high: int = 6) -> list[str]:
    return [rng.choice(VOCABULARY) for _ in range(rng.randint(low, high))]


def make_article(
    article_id: str,
    sentence_tokens: list[list[str]],
    tier: str = "LS",
    source: str | None = None,
) -> Article:
    return Article(
        id=article_id,
        source=source or article_id.split("/", 1)[0],
        url=f"https://example.org/{article_id}",
        crawl_date="2022-01-10",
        publication_date=None,
        language_tier=tier,
        sentences=[
            make_sentence(tokens, index=i) for i, tokens in enumerate(sentence_tokens)
        ],
    )


def make_pair(
    simple_tokens: list[list[str]],
    complex_tokens: list[list[str]],
    name: str = "fix/simple__fix/complex",
) -> ArticlePair:
    simple_id, complex_id = name.split("__")
    return ArticlePair(
        simple=make_article(simple_id, simple_tokens, tier="LS"),
        complex=make_article(complex_id, complex_tokens, tier="AS"),
    )


def deterministic_sentence_vector(text: str, dim: int = VECTOR_DIMENSION) -> np.ndarray:
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    rng = random.Random(int.from_bytes(digest[:8], "big"))
    return np.array([round(rng.uniform(-1.0, 1.0), 6) for _ in range(dim)])


def sentence_table_for(texts: list[str]) -> SentenceVectorTable:
    return SentenceVectorTable.from_texts(
        (text, deterministic_sentence_vector(text)) for text in texts
    )
