"""MST and MST-LIS matching with the variable mean-plus-k-sigma threshold."""

from __future__ import annotations

import logging
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .corpus import AlignmentSet, ArticlePair, Match
from .similarity import MEASURES, SimilarityContext, SimilarityError, SimilarityMatrix, build_matrix

logger = logging.getLogger(__name__)

THRESHOLD_NONE = "none"
THRESHOLD_MEAN_SIGMA = "mean-plus-k-sigma"


@dataclass(frozen=True)
class ThresholdPolicy:
    kind: str = THRESHOLD_MEAN_SIGMA
    k: float = 1.5

    def __post_init__(self) -> None:
        if self.kind not in (THRESHOLD_NONE, THRESHOLD_MEAN_SIGMA):
            raise ValueError(f"unknown threshold kind {self.kind!r}")

    @classmethod
    def none(cls) -> "ThresholdPolicy":
        return cls(kind=THRESHOLD_NONE)

    def threshold(self, matrix: SimilarityMatrix) -> float | None:
        if self.kind == THRESHOLD_NONE:
            return None
        return matrix.mu + self.k * matrix.sigma

    def accepts(self, matrix: SimilarityMatrix, score: float) -> bool:
        """Without a threshold a score of exactly 0 still does not count:
        0 encodes "no information" from degenerate inputs."""
        if self.kind == THRESHOLD_NONE:
            return score > 0.0
        return score >= matrix.mu + self.k * matrix.sigma


def _label(policy: ThresholdPolicy) -> str:
    return "nothr" if policy.kind == THRESHOLD_NONE else format(policy.k, "g")


def variant_name(measure: str, matcher: str, policy: ThresholdPolicy) -> str:
    matcher_token = {"MST": "mst", "MST-LIS": "mstlis"}[matcher]
    return f"{measure}-{matcher_token}-{_label(policy)}"


def _row_best(values: np.ndarray, row: int) -> tuple[int, float]:
    # argmax takes the first maximum, so ties break toward the smallest column.
    column = int(np.argmax(values[row]))
    return column, float(values[row, column])


def match_mst(matrix: SimilarityMatrix, policy: ThresholdPolicy) -> AlignmentSet:
    """Match each simple sentence with its most similar complex sentence."""
    matches = []
    for i in range(matrix.values.shape[0]):
        j, score = _row_best(matrix.values, i)
        if policy.accepts(matrix, score):
            matches.append(Match(i, j, score))
    return AlignmentSet(
        pair_id=matrix.pair_id,
        measure=matrix.measure,
        matcher="MST",
        threshold_k=None if policy.kind == THRESHOLD_NONE else policy.k,
        matches=matches,
    )


def longest_nondecreasing_subsequence(values: list[int]) -> list[int]:
    """Positions of one maximum-length non-decreasing subsequence.

    Patience method with predecessor reconstruction; deterministic.
    Non-strict ordering: equal neighbours are admitted.
    """
    if not values:
        return []
    tails: list[int] = []          # last value of each pile
    tail_positions: list[int] = []  # position holding that value
    predecessor = [-1] * len(values)
    for pos, value in enumerate(values):
        pile = bisect_right(tails, value)
        if pile == len(tails):
            tails.append(value)
            tail_positions.append(pos)
        else:
            tails[pile] = value
            tail_positions[pile] = pos
        predecessor[pos] = tail_positions[pile - 1] if pile > 0 else -1
    positions = []
    cursor = tail_positions[-1]
    while cursor != -1:
        positions.append(cursor)
        cursor = predecessor[cursor]
    return positions[::-1]


def match_mst_lis(
    matrix: SimilarityMatrix,
    policy: ThresholdPolicy,
    fill_boundary_gaps: bool = True,
) -> AlignmentSet:
    """MST filtered to the longest non-decreasing run of complex indices,
    with order-preserving gap filling.

    The LIS is computed over the full no-threshold MST proposals; the
    threshold constrains outputs only (kept matches and gap fills).
    """
    proposals = match_mst(matrix, ThresholdPolicy.none()).matches
    kept_positions = longest_nondecreasing_subsequence([m.complex_index for m in proposals])
    kept = [proposals[p] for p in kept_positions]

    n_columns = matrix.values.shape[1]
    matches: list[Match] = []

    def fill_gap(simple_indices: range, lower: int, upper: int) -> None:
        # After an acceptance the lower bound advances so later gap
        # sentences cannot violate the original order.
        for m in simple_indices:
            window = matrix.values[m, lower : upper + 1]
            if window.size == 0:
                continue
            offset = int(np.argmax(window))
            score = float(window[offset])
            if policy.accepts(matrix, score):
                column = lower + offset
                matches.append(Match(m, column, score))
                lower = column

    if kept:
        if fill_boundary_gaps and kept[0].simple_index > 0:
            fill_gap(range(0, kept[0].simple_index), 0, kept[0].complex_index)
        for left, right in zip(kept, kept[1:]):
            if policy.accepts(matrix, left.similarity):
                matches.append(left)
            fill_gap(
                range(left.simple_index + 1, right.simple_index),
                left.complex_index,
                right.complex_index,
            )
        last = kept[-1]
        if policy.accepts(matrix, last.similarity):
            matches.append(last)
        if fill_boundary_gaps and last.simple_index < matrix.values.shape[0] - 1:
            fill_gap(
                range(last.simple_index + 1, matrix.values.shape[0]),
                last.complex_index,
                n_columns - 1,
            )

    matches.sort(key=lambda m: m.simple_index)
    return AlignmentSet(
        pair_id=matrix.pair_id,
        measure=matrix.measure,
        matcher="MST-LIS",
        threshold_k=None if policy.kind == THRESHOLD_NONE else policy.k,
        matches=matches,
    )


def run_matcher(
    matrix: SimilarityMatrix, matcher: str, policy: ThresholdPolicy
) -> AlignmentSet:
    if matcher == "MST":
        return match_mst(matrix, policy)
    if matcher == "MST-LIS":
        return match_mst_lis(matrix, policy)
    raise ValueError(f"unknown matcher {matcher!r}")


@dataclass
class VariantSummary:
    variant: str
    measure: str
    matcher: str
    threshold_k: float | None
    matches: int
    average_similarity: float


@dataclass
class VariantResult:
    summary: VariantSummary
    alignments: list[AlignmentSet]
    skipped_pairs: list[str] = field(default_factory=list)


def _summarize(
    variant: str,
    measure: str,
    matcher: str,
    policy: ThresholdPolicy,
    alignments: list[AlignmentSet],
) -> VariantSummary:
    scores = [m.similarity for aset in alignments for m in aset.matches]
    return VariantSummary(
        variant=variant,
        measure=measure,
        matcher=matcher,
        threshold_k=None if policy.kind == THRESHOLD_NONE else policy.k,
        matches=len(scores),
        average_similarity=sum(scores) / len(scores) if scores else 0.0,
    )


def run_variant(
    pairs: list[ArticlePair],
    ctx: SimilarityContext,
    measure: str,
    matcher: str,
    policy: ThresholdPolicy,
) -> VariantResult:
    """One alignment variant over all pairs; per-pair errors become skips."""
    alignments = []
    skipped = []
    for pair in sorted(pairs, key=lambda p: p.pair_id):
        try:
            matrix = build_matrix(pair, measure, ctx)
        except SimilarityError as exc:
            skipped.append(pair.pair_id)
            logger.warning("skipping pair %s: %s", pair.pair_id, exc)
            continue
        alignments.append(run_matcher(matrix, matcher, policy))
    name = variant_name(measure, matcher, policy)
    summary = _summarize(name, measure, matcher, policy, alignments)
    return VariantResult(summary=summary, alignments=alignments, skipped_pairs=skipped)


def align_all(
    pairs: list[ArticlePair],
    ctx: SimilarityContext,
    ks: tuple[float, ...] = (1.5,),
) -> list[VariantResult]:
    """All measure x matcher x threshold variants, with one similarity
    matrix computed per (pair, measure)."""
    policies = [ThresholdPolicy.none()] + [ThresholdPolicy(k=k) for k in ks]
    results = []
    ordered_pairs = sorted(pairs, key=lambda p: p.pair_id)
    for measure in MEASURES:
        matrices = []
        skipped = []
        for pair in ordered_pairs:
            try:
                matrices.append(build_matrix(pair, measure, ctx))
            except SimilarityError as exc:
                skipped.append(pair.pair_id)
                logger.warning("skipping pair %s: %s", pair.pair_id, exc)
        for matcher in ("MST", "MST-LIS"):
            for policy in policies:
                alignments = [run_matcher(matrix, matcher, policy) for matrix in matrices]
                name = variant_name(measure, matcher, policy)
                results.append(
                    VariantResult(
                        summary=_summarize(name, measure, matcher, policy, alignments),
                        alignments=alignments,
                        skipped_pairs=list(skipped),
                    )
                )
    return results
