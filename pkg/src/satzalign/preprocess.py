"""Sentence normalization applied before similarity computation.

The published corpus text (``Sentence.raw_text``) is never modified; the
pipeline only fills ``tokens`` and ``char_stream``.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, replace

from .corpus import Article, Sentence

# German typographic quotes and dashes; all in Unicode P* categories, listed
# explicitly as the contract for what must be covered.
_EXTRA_PUNCTUATION = set("„“»«–—")

_APOSTROPHES = {"'", "’"}

# Base word, then a colon/asterisk/underscore marker, then the inclusive
# suffix, optionally plural.
_MARKER_SUFFIX = re.compile(r"^(.+)[:*_](?:in|In|innen|Innen)$")
# Medial uppercase I form ("PilotIn", "PilotInnen").
_UPPER_I_SUFFIX = re.compile(r"^(.+)I(?:n|nnen)$")

_HYPHEN_JOIN = re.compile(r"(?<=\w)-(\w)", re.UNICODE)


@dataclass(frozen=True)
class PreprocessProfile:
    """Normalization switches.

    TF-IDF based measures run with ``lowercase=True``; word/sentence
    embedding measures keep the original casing because the vector
    vocabularies distinguish e.g. "essen" from "Essen".
    """

    lowercase: bool
    strip_gender_suffixes: bool = True
    remove_punctuation: bool = True
    join_compound_hyphens: bool = True


TFIDF_PROFILE = PreprocessProfile(lowercase=True)
EMBEDDING_PROFILE = PreprocessProfile(lowercase=False)


def is_punctuation(char: str) -> bool:
    return char in _EXTRA_PUNCTUATION or unicodedata.category(char).startswith("P")


def strip_gender_suffix(word: str) -> str:
    """Remove an inclusive-language gender suffix, if present.

    Handles the four marker forms (medial uppercase I, colon, asterisk,
    underscore), each optionally with the plural suffix.  Plain "-in"
    endings that merely form the female noun ("Pilotin") are never
    stripped, nor is a bare word like "Berlin".
    """
    match = _MARKER_SUFFIX.match(word)
    if match:
        return match.group(1)
    match = _UPPER_I_SUFFIX.match(word)
    # Uppercase-I form only counts after a lowercase letter, so acronyms
    # like "ABIn" stay intact.
    if match and match.group(1)[-1].islower():
        return match.group(1)
    return word


def _strip_edge_punctuation(token: str) -> str:
    start = 0
    end = len(token)
    while start < end and is_punctuation(token[start]):
        start += 1
    while end > start and is_punctuation(token[end - 1]):
        end -= 1
    return token[start:end]


def _remove_punctuation(token: str) -> str:
    kept = []
    for i, char in enumerate(token):
        if not is_punctuation(char):
            kept.append(char)
        elif (
            char in _APOSTROPHES
            and 0 < i < len(token) - 1
            and token[i - 1].isalnum()
            and token[i + 1].isalnum()
        ):
            kept.append(char)
    return "".join(kept)


def _normalize_pass(token: str, profile: PreprocessProfile) -> str:
    token = _strip_edge_punctuation(token)
    if profile.join_compound_hyphens:
        token = _HYPHEN_JOIN.sub(lambda m: m.group(1).lower(), token)
    if profile.strip_gender_suffixes:
        token = strip_gender_suffix(token)
    if profile.remove_punctuation:
        token = _remove_punctuation(token)
    if profile.lowercase:
        token = token.lower()
    return token


def normalize_token(token: str, profile: PreprocessProfile) -> str:
    # Run to fixpoint: removing punctuation can expose a fresh gender
    # marker ("Pilot.In" -> "PilotIn"), which must also be stripped for
    # the pipeline to be idempotent.
    previous = None
    while token != previous:
        previous = token
        token = _normalize_pass(token, profile)
    return token


def normalize_sentence(sentence: Sentence, profile: PreprocessProfile) -> Sentence:
    """Return a copy with ``tokens`` and ``char_stream`` filled.

    ``raw_text`` is carried over untouched.  A sentence that normalizes to
    zero tokens is valid but degenerate (empty token list).
    """
    tokens = []
    for raw_token in sentence.raw_text.split():
        token = normalize_token(raw_token, profile)
        if token:
            tokens.append(token)
    return replace(sentence, tokens=tokens, char_stream=" ".join(tokens))


def normalize_article(article: Article, profile: PreprocessProfile) -> Article:
    return replace(
        article,
        sentences=[normalize_sentence(s, profile) for s in article.sentences],
    )
