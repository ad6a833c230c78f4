"""Ground-truth scoring, blind-label accuracy, sampling and corpus statistics."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from .corpus import AlignmentSet, Article, pair_file_stem

VERDICTS = ("match", "partial", "no_match")


class EvaluationError(Exception):
    pass


@dataclass
class GroundTruth:
    """Human n:1 sentence alignments for one article pair."""

    pair_id: str
    matches: set[tuple[int, int]] = field(default_factory=set)

    def __post_init__(self) -> None:
        simple_indices = [s for s, _ in self.matches]
        if len(simple_indices) != len(set(simple_indices)):
            raise ValueError(f"ground truth for {self.pair_id} violates n:1")


def write_ground_truth(truths: Iterable[GroundTruth], path: str | Path) -> None:
    """One ``pair <id>`` header per section, then "simple TAB complex" lines."""
    lines = []
    for truth in sorted(truths, key=lambda t: t.pair_id):
        lines.append(f"pair {truth.pair_id}")
        for simple_index, complex_index in sorted(truth.matches):
            lines.append(f"{simple_index}\t{complex_index}")
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def parse_ground_truth(text: str) -> list[GroundTruth]:
    truths: list[GroundTruth] = []
    current: GroundTruth | None = None
    for line_no, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("pair "):
            current = GroundTruth(pair_id=line[len("pair "):].strip())
            truths.append(current)
            continue
        if current is None:
            raise EvaluationError(f"line {line_no}: match record before any pair header")
        parts = line.split("\t")
        if len(parts) != 2:
            raise EvaluationError(f"line {line_no}: expected 'simple<TAB>complex'")
        current.matches.add((int(parts[0]), int(parts[1])))
    for truth in truths:
        GroundTruth(truth.pair_id, truth.matches)  # re-validate n:1 after parsing
    return truths


def load_ground_truth_dir(directory: str | Path) -> dict[str, GroundTruth]:
    truths: dict[str, GroundTruth] = {}
    directory = Path(directory)
    for path in sorted(directory.glob("*.gt")):
        for truth in parse_ground_truth(path.read_text(encoding="utf-8")):
            truths[truth.pair_id] = truth
    return truths


def ground_truth_filename(pair_id: str) -> str:
    return f"{pair_file_stem(pair_id)}.gt"


@dataclass
class LabelRecord:
    record_id: str
    variant: str
    pair_id: str
    simple_index: int
    complex_index: int
    verdict: str
    annotator: str
    timestamp: str

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "record_id": self.record_id,
                "variant": self.variant,
                "pair_id": self.pair_id,
                "simple_index": self.simple_index,
                "complex_index": self.complex_index,
                "verdict": self.verdict,
                "annotator": self.annotator,
                "timestamp": self.timestamp,
            },
            ensure_ascii=False,
            sort_keys=True,
        )

    @classmethod
    def from_json_line(cls, line: str) -> "LabelRecord":
        data = json.loads(line)
        return cls(
            record_id=data["record_id"],
            variant=data["variant"],
            pair_id=data["pair_id"],
            simple_index=data["simple_index"],
            complex_index=data["complex_index"],
            verdict=data["verdict"],
            annotator=data["annotator"],
            timestamp=data["timestamp"],
        )


def load_labels(path: str | Path) -> list[LabelRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(LabelRecord.from_json_line(line))
    return records


class Score(NamedTuple):
    precision: float
    recall: float
    f1: float
    gold: int
    predicted: int
    correct: int


def _prf(correct: int, predicted: int, gold: int) -> Score:
    precision = correct / predicted if predicted else 0.0
    recall = correct / gold if gold else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return Score(precision, recall, f1, gold, predicted, correct)


def score_against_ground_truth(predicted: AlignmentSet, gold: GroundTruth) -> Score:
    """Exact (simple_index, complex_index) set intersection scoring."""
    if predicted.pair_id != gold.pair_id:
        raise EvaluationError(
            f"pair mismatch: predicted {predicted.pair_id!r} vs gold {gold.pair_id!r}"
        )
    predicted_set = {(m.simple_index, m.complex_index) for m in predicted.matches}
    correct = len(predicted_set & gold.matches)
    return _prf(correct, len(predicted_set), len(gold.matches))


def score_corpus(
    predicted: Iterable[AlignmentSet], gold: dict[str, GroundTruth]
) -> dict[str, Score]:
    """Micro-averaged scores, overall under key "all" plus one per source.

    Only pairs present in the ground truth contribute; the source of a
    pair is its simple article's source.
    """
    pooled: dict[str, list[tuple[int, int, int]]] = {}
    for aset in predicted:
        truth = gold.get(aset.pair_id)
        if truth is None:
            continue
        source = aset.pair_id.split("/", 1)[0]
        per_pair = score_against_ground_truth(aset, truth)
        for scope in ("all", source):
            pooled.setdefault(scope, []).append(
                (per_pair.correct, per_pair.predicted, per_pair.gold)
            )
    scores = {}
    for scope, triples in pooled.items():
        correct = sum(t[0] for t in triples)
        predicted_n = sum(t[1] for t in triples)
        gold_n = sum(t[2] for t in triples)
        scores[scope] = _prf(correct, predicted_n, gold_n)
    return scores


def classification_accuracy(labels: Iterable[LabelRecord], variant: str | None = None) -> float:
    """Fraction of labels judged match or partial, optionally per variant."""
    relevant = [l for l in labels if variant is None or l.variant == variant]
    if not relevant:
        raise EvaluationError(
            f"no labels for variant {variant!r}" if variant else "no labels at all"
        )
    positive = sum(1 for l in relevant if l.verdict in ("match", "partial"))
    return positive / len(relevant)


@dataclass
class LabelTask:
    """Stub record for one sampled match awaiting a human verdict."""

    task_id: str
    variant: str
    pair_id: str
    simple_index: int
    complex_index: int
    similarity: float
    simple_text: str
    complex_text: str

    def to_json_line(self) -> str:
        return json.dumps(self.__dict__, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json_line(cls, line: str) -> "LabelTask":
        return cls(**json.loads(line))


def write_label_tasks(tasks: Iterable[LabelTask], path: str | Path) -> None:
    Path(path).write_text(
        "".join(task.to_json_line() + "\n" for task in tasks), encoding="utf-8"
    )


def load_label_tasks(path: str | Path) -> list[LabelTask]:
    return [
        LabelTask.from_json_line(line)
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]


def sample_for_labelling(
    alignments_by_variant: dict[str, list[AlignmentSet]],
    articles: dict[str, Article],
    sample_size: int,
    seed: int,
) -> tuple[list[LabelTask], bool]:
    """Uniform sample without replacement over all (variant, pair, match)
    triples.  Returns (tasks, truncated): ``truncated`` is set when the
    population is smaller than the request and everything was returned.
    """
    population: list[tuple[str, str, object]] = []
    for variant in sorted(alignments_by_variant):
        for aset in sorted(alignments_by_variant[variant], key=lambda a: a.pair_id):
            for match in sorted(aset.matches, key=lambda m: m.simple_index):
                population.append((variant, aset.pair_id, match))
    rng = random.Random(seed)
    truncated = sample_size > len(population)
    chosen = population if truncated else rng.sample(population, sample_size)
    tasks = []
    for i, (variant, pair_id, match) in enumerate(chosen):
        simple_id, complex_id = pair_id.split("__", 1)
        tasks.append(
            LabelTask(
                task_id=f"task-{i:06d}",
                variant=variant,
                pair_id=pair_id,
                simple_index=match.simple_index,
                complex_index=match.complex_index,
                similarity=match.similarity,
                simple_text=articles[simple_id].sentences[match.simple_index].raw_text,
                complex_text=articles[complex_id].sentences[match.complex_index].raw_text,
            )
        )
    return tasks, truncated


@dataclass
class StatisticsRow:
    source: str
    tier: str
    articles: int
    tokens: int
    sentences_per_article: float
    tokens_per_sentence: float
    words_per_article: float


def _stats_for(articles: list[Article], source: str, tier: str) -> StatisticsRow:
    token_total = 0
    sentence_total = 0
    distinct_counts = []
    for article in articles:
        words: set[str] = set()
        for sentence in article.sentences:
            raw_tokens = sentence.raw_text.split()
            token_total += len(raw_tokens)
            sentence_total += 1
            words.update(raw_tokens)
        distinct_counts.append(len(words))
    count = len(articles)
    return StatisticsRow(
        source=source,
        tier=tier,
        articles=count,
        tokens=token_total,
        sentences_per_article=sentence_total / count if count else 0.0,
        tokens_per_sentence=token_total / sentence_total if sentence_total else 0.0,
        words_per_article=sum(distinct_counts) / count if count else 0.0,
    )


def corpus_statistics(articles: Iterable[Article]) -> list[StatisticsRow]:
    """Per (source, tier) rows plus pooled totals per side.

    Tokens are whitespace tokens of the raw, non-normalized sentences:
    the statistics describe the published corpus.
    """
    grouped: dict[tuple[str, str], list[Article]] = {}
    simple_pool: list[Article] = []
    complex_pool: list[Article] = []
    for article in articles:
        grouped.setdefault((article.source, article.language_tier), []).append(article)
        (simple_pool if article.is_simple else complex_pool).append(article)
    rows = [
        _stats_for(grouped[key], key[0], key[1]) for key in sorted(grouped)
    ]
    if simple_pool:
        rows.append(_stats_for(simple_pool, "total", "simple"))
    if complex_pool:
        rows.append(_stats_for(complex_pool, "total", "AS"))
    return rows


def statistics_csv(rows: list[StatisticsRow]) -> str:
    lines = [
        "source,tier,articles,tokens,sentences_per_article,tokens_per_sentence,words_per_article"
    ]
    for row in rows:
        lines.append(
            f"{row.source},{row.tier},{row.articles},{row.tokens},"
            f"{row.sentences_per_article:.6f},{row.tokens_per_sentence:.6f},"
            f"{row.words_per_article:.6f}"
        )
    return "\n".join(lines) + "\n"


def scores_csv(scores: dict[str, Score]) -> str:
    lines = ["scope,gold,predicted,correct,precision,recall,f1"]
    for scope in sorted(scores, key=lambda s: (s != "all", s)):
        score = scores[scope]
        lines.append(
            f"{scope},{score.gold},{score.predicted},{score.correct},"
            f"{score.precision:.6f},{score.recall:.6f},{score.f1:.6f}"
        )
    return "\n".join(lines) + "\n"


def accuracy_csv(labels: list[LabelRecord], variant: str | None = None) -> str:
    variants = sorted({l.variant for l in labels}) if variant is None else [variant]
    lines = ["variant,labels,accuracy"]
    for name in variants:
        relevant = [l for l in labels if l.variant == name]
        accuracy = classification_accuracy(relevant)
        lines.append(f"{name},{len(relevant)},{accuracy:.6f}")
    return "\n".join(lines) + "\n"
