"""The eight sentence-similarity measures and similarity-matrix construction.

Degenerate inputs (no in-vocabulary tokens, empty token lists, provider
misses) score 0 and bump a diagnostics counter, which keeps matrices total
and such pairs below any positive threshold.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .corpus import Article, ArticlePair, Sentence
from .embeddings import (
    SentenceVectorProvider,
    TfidfStats,
    WordVectorStore,
    build_tfidf,
    sentence_terms,
)
from .preprocess import EMBEDDING_PROFILE, TFIDF_PROFILE, normalize_article

MEASURES = (
    "bow",
    "char4gram",
    "cosine",
    "average",
    "cwasa",
    "maximum",
    "bipartite",
    "sentence-embedding",
)

#: Which preprocessing profile each measure reads its tokens from.
MEASURE_PROFILE = {
    "bow": "tfidf",
    "char4gram": "tfidf",
    "cosine": "embedding",
    "average": "embedding",
    "cwasa": "embedding",
    "maximum": "embedding",
    "bipartite": "embedding",
    "sentence-embedding": "embedding",
}


class SimilarityError(Exception):
    pass


def cossim(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _count(diagnostics: Counter | None, key: str) -> None:
    if diagnostics is not None:
        diagnostics[key] += 1


def _tfidf_weights(sentence: Sentence, stats: TfidfStats) -> dict[str, float]:
    weights = {}
    for term, tf in Counter(sentence_terms(sentence, stats.term_kind)).items():
        weights[term] = tf * stats.idf(term)
    return weights


def _tfidf_cosine(
    s_simple: Sentence, s_complex: Sentence, stats: TfidfStats, diagnostics: Counter | None
) -> float:
    ws = _tfidf_weights(s_simple, stats)
    wc = _tfidf_weights(s_complex, stats)
    norm_s = math.sqrt(sum(v * v for v in ws.values()))
    norm_c = math.sqrt(sum(v * v for v in wc.values()))
    if norm_s == 0.0 or norm_c == 0.0:
        _count(diagnostics, "degenerate_tfidf")
        return 0.0
    shared = ws.keys() & wc.keys()
    return sum(ws[t] * wc[t] for t in shared) / (norm_s * norm_c)


def sim_bow(
    s_simple: Sentence,
    s_complex: Sentence,
    tfidf_stats: TfidfStats,
    diagnostics: Counter | None = None,
) -> float:
    """TF-IDF weighted bag-of-words overlap cosine."""
    if tfidf_stats.term_kind != "word":
        raise SimilarityError("sim_bow needs word-level statistics")
    return _tfidf_cosine(s_simple, s_complex, tfidf_stats, diagnostics)


def sim_char4gram(
    s_simple: Sentence,
    s_complex: Sentence,
    gram_stats: TfidfStats,
    diagnostics: Counter | None = None,
) -> float:
    """Character 4-gram analogue of the bag-of-words cosine; grams span
    word boundaries of the space-joined token stream."""
    if gram_stats.term_kind != "char4gram":
        raise SimilarityError("sim_char4gram needs char4gram statistics")
    return _tfidf_cosine(s_simple, s_complex, gram_stats, diagnostics)


def _in_vocab_units(
    sentence: Sentence, store: WordVectorStore
) -> tuple[list[int], np.ndarray]:
    indices = []
    units = []
    for i, token in enumerate(sentence.tokens):
        unit = store.unit(token)
        if unit is not None:
            indices.append(i)
            units.append(unit)
    if not indices:
        return [], np.empty((0, store.dimension))
    return indices, np.vstack(units)


def _phi_matrix(
    s_simple: Sentence, s_complex: Sentence, store: WordVectorStore
) -> tuple[list[int], list[int], np.ndarray]:
    idx_s, units_s = _in_vocab_units(s_simple, store)
    idx_c, units_c = _in_vocab_units(s_complex, store)
    if not idx_s or not idx_c:
        return idx_s, idx_c, np.empty((len(idx_s), len(idx_c)))
    return idx_s, idx_c, units_s @ units_c.T


def sim_cosine(
    s_simple: Sentence,
    s_complex: Sentence,
    word_vectors: WordVectorStore,
    diagnostics: Counter | None = None,
) -> float:
    """Cosine of the summed word vectors of the two sentences."""
    sums = []
    for sentence in (s_simple, s_complex):
        vectors = [v for t in sentence.tokens if (v := word_vectors.lookup(t)) is not None]
        if not vectors:
            _count(diagnostics, "degenerate_embedding")
            return 0.0
        sums.append(np.sum(vectors, axis=0))
    return cossim(sums[0], sums[1])


def sim_average(
    s_simple: Sentence,
    s_complex: Sentence,
    word_vectors: WordVectorStore,
    diagnostics: Counter | None = None,
) -> float:
    """Mean pairwise word cosine over the in-vocabulary tokens."""
    idx_s, idx_c, phi = _phi_matrix(s_simple, s_complex, word_vectors)
    if not idx_s or not idx_c:
        _count(diagnostics, "degenerate_embedding")
        return 0.0
    return float(phi.mean())


def _best_match_pairs(
    idx_s: list[int], idx_c: list[int], phi: np.ndarray
) -> tuple[dict[tuple[int, int], float], dict[tuple[int, int], float]]:
    """Per-word best matches constrained to cosine >= 0, both directions.

    Pairs are keyed by original token indices; ties break toward the
    smallest opposing index (argmax returns the first maximum).
    """
    matches_s: dict[tuple[int, int], float] = {}
    matches_c: dict[tuple[int, int], float] = {}
    for a in range(len(idx_s)):
        b = int(np.argmax(phi[a]))
        value = float(phi[a, b])
        if value >= 0.0:
            matches_s[(idx_s[a], idx_c[b])] = value
    for b in range(len(idx_c)):
        a = int(np.argmax(phi[:, b]))
        value = float(phi[a, b])
        if value >= 0.0:
            matches_c[(idx_s[a], idx_c[b])] = value
    return matches_s, matches_c


def sim_cwasa(
    s_simple: Sentence,
    s_complex: Sentence,
    word_vectors: WordVectorStore,
    diagnostics: Counter | None = None,
) -> float:
    """Average cosine over the union of both directions' best matches.

    Identical pairs contributed by both directions count once; an empty
    union (all cross cosines negative) scores 0.
    """
    idx_s, idx_c, phi = _phi_matrix(s_simple, s_complex, word_vectors)
    if not idx_s or not idx_c:
        _count(diagnostics, "degenerate_embedding")
        return 0.0
    matches_s, matches_c = _best_match_pairs(idx_s, idx_c, phi)
    union = {**matches_s, **matches_c}
    if not union:
        _count(diagnostics, "cwasa_empty_union")
        return 0.0
    return sum(union.values()) / len(union)


def sim_maximum(
    s_simple: Sentence,
    s_complex: Sentence,
    word_vectors: WordVectorStore,
    diagnostics: Counter | None = None,
) -> float:
    """Half-sum of the two asymmetric best-match averages."""
    idx_s, idx_c, phi = _phi_matrix(s_simple, s_complex, word_vectors)
    if not idx_s or not idx_c:
        _count(diagnostics, "degenerate_embedding")
        return 0.0
    matches_s, matches_c = _best_match_pairs(idx_s, idx_c, phi)
    if not matches_s and not matches_c:
        _count(diagnostics, "maximum_no_matches")
        return 0.0
    asym_s = sum(matches_s.values()) / len(matches_s) if matches_s else 0.0
    asym_c = sum(matches_c.values()) / len(matches_c) if matches_c else 0.0
    return 0.5 * (asym_s + asym_c)


def sim_bipartite(
    s_simple: Sentence,
    s_complex: Sentence,
    word_vectors: WordVectorStore,
    diagnostics: Counter | None = None,
) -> float:
    """Average edge weight of an exact maximum-weight matching whose
    cardinality is the smaller in-vocabulary token count; negative
    cosines are legitimate weights."""
    idx_s, idx_c, phi = _phi_matrix(s_simple, s_complex, word_vectors)
    if not idx_s or not idx_c:
        _count(diagnostics, "degenerate_embedding")
        return 0.0
    rows, cols = linear_sum_assignment(phi, maximize=True)
    cardinality = min(len(idx_s), len(idx_c))
    return float(phi[rows, cols].sum()) / cardinality


def sim_sentence_embedding(
    s_simple: Sentence,
    s_complex: Sentence,
    sentence_provider: SentenceVectorProvider,
    diagnostics: Counter | None = None,
) -> float:
    """Cosine of the two sentences' stored embedding vectors."""
    vec_s = sentence_provider.get(s_simple.raw_text)
    vec_c = sentence_provider.get(s_complex.raw_text)
    if vec_s is None or vec_c is None:
        _count(diagnostics, "sentence_vector_miss")
        return 0.0
    return cossim(vec_s, vec_c)


@dataclass
class SimilarityContext:
    """Immutable bundle of providers and preprocessed article views."""

    articles: dict[str, Article]
    tfidf_view: dict[str, Article]
    embedding_view: dict[str, Article]
    word_store: WordVectorStore | None = None
    sentence_provider: SentenceVectorProvider | None = None
    word_stats: TfidfStats | None = None
    gram_stats: TfidfStats | None = None
    diagnostics: Counter = field(default_factory=Counter)

    @classmethod
    def build(
        cls,
        articles: dict[str, Article],
        word_store: WordVectorStore | None = None,
        sentence_provider: SentenceVectorProvider | None = None,
    ) -> "SimilarityContext":
        tfidf_view = {aid: normalize_article(a, TFIDF_PROFILE) for aid, a in articles.items()}
        embedding_view = {
            aid: normalize_article(a, EMBEDDING_PROFILE) for aid, a in articles.items()
        }
        word_stats = build_tfidf(tfidf_view.values(), "word") if articles else None
        gram_stats = build_tfidf(tfidf_view.values(), "char4gram") if articles else None
        return cls(
            articles=articles,
            tfidf_view=tfidf_view,
            embedding_view=embedding_view,
            word_store=word_store,
            sentence_provider=sentence_provider,
            word_stats=word_stats,
            gram_stats=gram_stats,
        )

    def view(self, measure: str) -> dict[str, Article]:
        return self.tfidf_view if MEASURE_PROFILE[measure] == "tfidf" else self.embedding_view

    def score(self, measure: str, s_simple: Sentence, s_complex: Sentence) -> float:
        if measure == "bow":
            if self.word_stats is None:
                raise SimilarityError("bow needs TF-IDF statistics")
            return sim_bow(s_simple, s_complex, self.word_stats, self.diagnostics)
        if measure == "char4gram":
            if self.gram_stats is None:
                raise SimilarityError("char4gram needs 4-gram statistics")
            return sim_char4gram(s_simple, s_complex, self.gram_stats, self.diagnostics)
        if measure == "sentence-embedding":
            if self.sentence_provider is None:
                raise SimilarityError("sentence-embedding needs a sentence-vector provider")
            return sim_sentence_embedding(
                s_simple, s_complex, self.sentence_provider, self.diagnostics
            )
        if measure in ("cosine", "average", "cwasa", "maximum", "bipartite"):
            if self.word_store is None:
                raise SimilarityError(f"{measure} needs word vectors")
            fn = {
                "cosine": sim_cosine,
                "average": sim_average,
                "cwasa": sim_cwasa,
                "maximum": sim_maximum,
                "bipartite": sim_bipartite,
            }[measure]
            return fn(s_simple, s_complex, self.word_store, self.diagnostics)
        raise SimilarityError(f"unknown measure {measure!r}")


@dataclass
class SimilarityMatrix:
    """n x m score matrix; rows are simple sentences, columns complex."""

    pair_id: str
    measure: str
    values: np.ndarray
    mu: float
    sigma: float

    @classmethod
    def from_values(cls, pair_id: str, measure: str, values: np.ndarray) -> "SimilarityMatrix":
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.size == 0:
            raise SimilarityError(f"empty similarity matrix for pair {pair_id!r}")
        if not np.all(np.isfinite(values)):
            raise SimilarityError(f"non-finite similarity for pair {pair_id!r}")
        # Population standard deviation: the matrix is the whole candidate set.
        return cls(
            pair_id=pair_id,
            measure=measure,
            values=values,
            mu=float(values.mean()),
            sigma=float(values.std()),
        )


def build_matrix(pair: ArticlePair, measure: str, ctx: SimilarityContext) -> SimilarityMatrix:
    view = ctx.view(measure)
    simple = view[pair.simple.id]
    complex_ = view[pair.complex.id]
    n, m = len(simple.sentences), len(complex_.sentences)
    if n == 0 or m == 0:
        raise SimilarityError(f"pair {pair.pair_id!r} has an empty sentence list")
    values = np.empty((n, m), dtype=np.float64)
    for i, s in enumerate(simple.sentences):
        for j, c in enumerate(complex_.sentences):
            values[i, j] = ctx.score(measure, s, c)
    return SimilarityMatrix.from_values(pair.pair_id, measure, values)


@dataclass
class HistogramTable:
    measure: str
    sample_size: int
    seed: int
    with_replacement: bool
    rows: list[tuple[float, float, int]]

    def to_csv(self) -> str:
        lines = ["bin_lo,bin_hi,count"]
        for lo, hi, count in self.rows:
            lines.append(f"{lo:.6f},{hi:.6f},{count}")
        return "\n".join(lines) + "\n"


def sample_similarity_histogram(
    ctx: SimilarityContext,
    measure: str,
    sample_size: int,
    bin_count: int,
    seed: int,
) -> HistogramTable:
    """Histogram of the measure over uniformly sampled cross-article
    (simple sentence, complex sentence) pairs; deterministic per seed."""
    if sample_size == 0:
        return HistogramTable(measure, 0, seed, False, [])
    view = ctx.view(measure)
    simple_pool = [
        (aid, i)
        for aid in sorted(view)
        if view[aid].is_simple
        for i in range(len(view[aid].sentences))
    ]
    complex_pool = [
        (aid, i)
        for aid in sorted(view)
        if not view[aid].is_simple
        for i in range(len(view[aid].sentences))
    ]
    population = len(simple_pool) * len(complex_pool)
    if population == 0:
        raise SimilarityError("histogram sampling needs sentences on both tiers")
    rng = random.Random(seed)
    with_replacement = population < sample_size
    if with_replacement:
        draws = [rng.randrange(population) for _ in range(sample_size)]
    else:
        draws = rng.sample(range(population), sample_size)
    values = []
    for draw in draws:
        aid_s, i = simple_pool[draw // len(complex_pool)]
        aid_c, j = complex_pool[draw % len(complex_pool)]
        values.append(
            ctx.score(measure, view[aid_s].sentences[i], view[aid_c].sentences[j])
        )
    lo = min(values)
    hi = max(values)
    width = (hi - lo) / bin_count
    counts = [0] * bin_count
    for value in values:
        index = int((value - lo) / width) if width > 0 else 0
        counts[min(index, bin_count - 1)] += 1
    rows = [
        (lo + k * width, lo + (k + 1) * width, counts[k]) for k in range(bin_count)
    ]
    return HistogramTable(measure, sample_size, seed, with_replacement, rows)
