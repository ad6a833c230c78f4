"""Independent straight-from-the-formula oracles.

Everything here is written directly from the defining equations with plain
Python loops and enumeration, deliberately sharing no code with the
package under test.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter


def cosine(u, v) -> float:
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def idf(term: str, df: dict[str, int], document_count: int) -> float:
    if term not in df:
        return math.log(document_count + 1)
    return math.log(document_count / df[term])


def tfidf_cosine(
    terms_a: list[str], terms_b: list[str], df: dict[str, int], document_count: int
) -> float:
    """Bag-of-terms cosine with tf*idf weights, summed over unique terms."""
    counts_a = Counter(terms_a)
    counts_b = Counter(terms_b)
    weights_a = {t: c * idf(t, df, document_count) for t, c in counts_a.items()}
    weights_b = {t: c * idf(t, df, document_count) for t, c in counts_b.items()}
    shared = set(weights_a) & set(weights_b)
    numerator = sum(weights_a[t] * weights_b[t] for t in shared)
    denominator = math.sqrt(
        sum(w * w for w in weights_a.values()) * sum(w * w for w in weights_b.values())
    )
    if denominator == 0.0:
        return 0.0
    return numerator / denominator


def char4grams(stream: str) -> list[str]:
    return [stream[i : i + 4] for i in range(len(stream) - 3)]


def article_df(token_documents: list[list[str]]) -> dict[str, int]:
    df: Counter[str] = Counter()
    for tokens in token_documents:
        df.update(set(tokens))
    return dict(df)


def summed_vector_cosine(tokens_a, tokens_b, vectors) -> float:
    vecs_a = [vectors[t] for t in tokens_a if t in vectors]
    vecs_b = [vectors[t] for t in tokens_b if t in vectors]
    if not vecs_a or not vecs_b:
        return 0.0
    sum_a = [sum(col) for col in zip(*vecs_a)]
    sum_b = [sum(col) for col in zip(*vecs_b)]
    return cosine(sum_a, sum_b)


def _phi_pairs(tokens_a, tokens_b, vectors):
    """All (i, j, cosine) triples over in-vocabulary token occurrences."""
    triples = []
    for i, ta in enumerate(tokens_a):
        if ta not in vectors:
            continue
        for j, tb in enumerate(tokens_b):
            if tb not in vectors:
                continue
            triples.append((i, j, cosine(vectors[ta], vectors[tb])))
    return triples


def average_similarity(tokens_a, tokens_b, vectors) -> float:
    triples = _phi_pairs(tokens_a, tokens_b, vectors)
    if not triples:
        return 0.0
    return sum(t[2] for t in triples) / len(triples)


def _best_matches(tokens_a, tokens_b, vectors):
    """Best match per word on each side, constrained to cosine >= 0.

    Returns (matches_for_a, matches_for_b) as dicts keyed by (i, j).
    Ties break toward the smallest opposing index.
    """
    triples = _phi_pairs(tokens_a, tokens_b, vectors)
    by_i: dict[int, tuple[int, float]] = {}
    by_j: dict[int, tuple[int, float]] = {}
    for i, j, value in triples:
        if i not in by_i or value > by_i[i][1]:
            by_i[i] = (j, value)
        if j not in by_j or value > by_j[j][1]:
            by_j[j] = (i, value)
    matches_a = {(i, j): v for i, (j, v) in by_i.items() if v >= 0.0}
    matches_b = {(i, j): v for j, (i, v) in by_j.items() if v >= 0.0}
    return matches_a, matches_b


def cwasa(tokens_a, tokens_b, vectors) -> float:
    matches_a, matches_b = _best_matches(tokens_a, tokens_b, vectors)
    union = {**matches_a, **matches_b}
    if not union:
        return 0.0
    return sum(union.values()) / len(union)


def maximum_similarity(tokens_a, tokens_b, vectors) -> float:
    matches_a, matches_b = _best_matches(tokens_a, tokens_b, vectors)
    if not matches_a and not matches_b:
        return 0.0
    asym_a = sum(matches_a.values()) / len(matches_a) if matches_a else 0.0
    asym_b = sum(matches_b.values()) / len(matches_b) if matches_b else 0.0
    return (asym_a + asym_b) / 2.0


def bipartite_bruteforce(tokens_a, tokens_b, vectors) -> float:
    """Exhaustive enumeration of all maximum-cardinality matchings."""
    in_a = [t for t in tokens_a if t in vectors]
    in_b = [t for t in tokens_b if t in vectors]
    if not in_a or not in_b:
        return 0.0
    phi = [[cosine(vectors[ta], vectors[tb]) for tb in in_b] for ta in in_a]
    k = min(len(in_a), len(in_b))
    best = -math.inf
    rows = range(len(in_a))
    cols = range(len(in_b))
    for row_subset in itertools.combinations(rows, k):
        for col_perm in itertools.permutations(cols, k):
            total = sum(phi[r][c] for r, c in zip(row_subset, col_perm))
            best = max(best, total)
    return best / k


def longest_nondecreasing_length(values: list[int]) -> int:
    """O(n^2) dynamic program for the maximum non-decreasing subsequence length."""
    if not values:
        return 0
    best = [1] * len(values)
    for i in range(len(values)):
        for j in range(i):
            if values[j] <= values[i]:
                best[i] = max(best[i], best[j] + 1)
    return max(best)


def mst_matches(matrix: list[list[float]]) -> list[tuple[int, int, float]]:
    """Row argmax proposals, smallest column on ties, rows with max > 0 only."""
    proposals = []
    for i, row in enumerate(matrix):
        best_j = 0
        best = row[0]
        for j, value in enumerate(row):
            if value > best:
                best = value
                best_j = j
        if best > 0.0:
            proposals.append((i, best_j, best))
    return proposals
