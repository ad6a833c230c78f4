import pytest

from satzalign.corpus import AlignmentSet, Match
from satzalign.evaluation import (
    EvaluationError,
    GroundTruth,
    LabelRecord,
    accuracy_csv,
    classification_accuracy,
    corpus_statistics,
    ground_truth_filename,
    load_ground_truth_dir,
    load_label_tasks,
    load_labels,
    sample_for_labelling,
    score_against_ground_truth,
    score_corpus,
    statistics_csv,
    write_ground_truth,
    write_label_tasks,
)

from helpers import make_article


def _aset(pair_id, pairs, measure="maximum", matcher="MST-LIS", k=1.5):
    return AlignmentSet(
        pair_id, measure, matcher, k, [Match(s, c, 0.5) for s, c in pairs]
    )


def _label(record_id, verdict, variant="maximum-mstlis-1.5"):
    return LabelRecord(
        record_id=record_id,
        variant=variant,
        pair_id="apo/a__apo/b",
        simple_index=0,
        complex_index=0,
        verdict=verdict,
        annotator="ann",
        timestamp="2022-02-01T10:00:00+00:00",
    )


class TestScoreAgainstGroundTruth:
    def test_perfect_prediction(self):
        gold = GroundTruth("apo/a__apo/b", {(0, 0), (1, 2)})
        predicted = _aset("apo/a__apo/b", [(0, 0), (1, 2)])
        score = score_against_ground_truth(predicted, gold)
        assert (score.precision, score.recall, score.f1) == (1.0, 1.0, 1.0)

    def test_half_overlap(self):
        gold = GroundTruth("apo/a__apo/b", {(1, 1), (3, 2)})
        predicted = _aset("apo/a__apo/b", [(1, 1), (2, 2)])
        score = score_against_ground_truth(predicted, gold)
        assert (score.precision, score.recall, score.f1) == (0.5, 0.5, 0.5)

    def test_empty_prediction_gives_zero_precision(self):
        gold = GroundTruth("apo/a__apo/b", {(0, 0)})
        score = score_against_ground_truth(_aset("apo/a__apo/b", []), gold)
        assert score.precision == 0.0
        assert score.recall == 0.0
        assert score.f1 == 0.0

    def test_empty_gold_gives_zero_recall(self):
        gold = GroundTruth("apo/a__apo/b", set())
        score = score_against_ground_truth(_aset("apo/a__apo/b", [(0, 0)]), gold)
        assert score.recall == 0.0
        assert score.f1 == 0.0

    def test_pair_mismatch_is_error(self):
        gold = GroundTruth("apo/a__apo/b", {(0, 0)})
        with pytest.raises(EvaluationError):
            score_against_ground_truth(_aset("apo/x__apo/y", [(0, 0)]), gold)

    def test_match_order_does_not_matter(self):
        gold = GroundTruth("apo/a__apo/b", {(0, 0), (1, 2)})
        forward = _aset("apo/a__apo/b", [(0, 0), (1, 2)])
        backward = _aset("apo/a__apo/b", [(1, 2), (0, 0)])
        assert score_against_ground_truth(forward, gold) == score_against_ground_truth(
            backward, gold
        )


class TestScoreCorpus:
    def test_micro_average_three_pair_fixture(self):
        gold = {
            "apo/s1__apo/c1": GroundTruth("apo/s1__apo/c1", {(0, 0)}),
            "apo/s2__apo/c2": GroundTruth("apo/s2__apo/c2", {(0, 1), (1, 1)}),
            "mdr/s3__mdr/c3": GroundTruth("mdr/s3__mdr/c3", {(2, 0)}),
        }
        predicted = [
            _aset("apo/s1__apo/c1", [(0, 0), (1, 1)]),
            _aset("apo/s2__apo/c2", [(0, 1)]),
            _aset("mdr/s3__mdr/c3", []),
        ]
        scores = score_corpus(predicted, gold)
        # pooled: correct 2, predicted 3, gold 4
        assert scores["all"].precision == pytest.approx(2 / 3)
        assert scores["all"].recall == pytest.approx(0.5)
        assert scores["all"].f1 == pytest.approx(4 / 7)
        # per-source breakdown
        assert scores["apo"].correct == 2 and scores["apo"].predicted == 3
        assert scores["mdr"].predicted == 0 and scores["mdr"].gold == 1

    def test_scores_stay_in_unit_interval(self):
        gold = {"a/s__a/c": GroundTruth("a/s__a/c", {(0, 0), (5, 5)})}
        predicted = [_aset("a/s__a/c", [(0, 0), (1, 1), (2, 2)])]
        for score in score_corpus(predicted, gold).values():
            assert 0.0 <= score.precision <= 1.0
            assert 0.0 <= score.recall <= 1.0
            assert 0.0 <= score.f1 <= 1.0


class TestClassificationAccuracy:
    def test_all_match(self):
        labels = [_label(f"t{i}", "match") for i in range(4)]
        assert classification_accuracy(labels) == 1.0

    def test_partial_counts_as_positive(self):
        labels = [
            _label("t1", "match"),
            _label("t2", "match"),
            _label("t3", "partial"),
            _label("t4", "no_match"),
        ]
        assert classification_accuracy(labels) == 0.75

    def test_variant_filter(self):
        labels = [
            _label("t1", "match", variant="bow-mst-nothr"),
            _label("t2", "no_match", variant="maximum-mstlis-1.5"),
        ]
        assert classification_accuracy(labels, "bow-mst-nothr") == 1.0
        assert classification_accuracy(labels, "maximum-mstlis-1.5") == 0.0

    def test_zero_labels_is_error(self):
        with pytest.raises(EvaluationError):
            classification_accuracy([])
        with pytest.raises(EvaluationError):
            classification_accuracy([_label("t1", "match")], "unknown-variant")

    def test_invalid_verdict_rejected(self):
        with pytest.raises(ValueError):
            _label("t1", "maybe")

    def test_accuracy_csv(self):
        labels = [
            _label("t1", "match"),
            _label("t2", "partial"),
            _label("t3", "no_match"),
            _label("t4", "no_match"),
        ]
        csv = accuracy_csv(labels)
        assert csv.splitlines()[1] == "maximum-mstlis-1.5,4,0.500000"


class TestSampleForLabelling:
    def _population(self):
        articles = {}
        by_variant = {}
        for v, variant in enumerate(["bow-mst-nothr", "maximum-mstlis-1.5"]):
            sets = []
            for p in range(5):
                simple = make_article(f"apo/s{v}{p}", [["ein", "satz"]] * 10, tier="ES")
                complex_ = make_article(f"apo/c{v}{p}", [["ein", "satz"]] * 10, tier="AS")
                articles[simple.id] = simple
                articles[complex_.id] = complex_
                sets.append(
                    _aset(
                        f"apo/s{v}{p}__apo/c{v}{p}",
                        [(i, i) for i in range(10)],
                        measure=variant.split("-")[0],
                    )
                )
            by_variant[variant] = sets
        return by_variant, articles  # population = 2 * 5 * 10 = 100 triples

    def test_sample_size_zero(self):
        by_variant, articles = self._population()
        tasks, truncated = sample_for_labelling(by_variant, articles, 0, seed=1)
        assert tasks == [] and not truncated

    def test_same_seed_identical(self):
        by_variant, articles = self._population()
        first, _ = sample_for_labelling(by_variant, articles, 10, seed=9)
        second, _ = sample_for_labelling(by_variant, articles, 10, seed=9)
        assert [t.to_json_line() for t in first] == [t.to_json_line() for t in second]

    def test_sample_is_subset_of_population(self):
        by_variant, articles = self._population()
        tasks, truncated = sample_for_labelling(by_variant, articles, 10, seed=3)
        assert len(tasks) == 10 and not truncated
        population = {
            (variant, aset.pair_id, m.simple_index, m.complex_index)
            for variant, sets in by_variant.items()
            for aset in sets
            for m in aset.matches
        }
        for task in tasks:
            assert (task.variant, task.pair_id, task.simple_index, task.complex_index) in population
            assert task.simple_text == "ein satz"

    def test_oversized_sample_returns_population(self):
        by_variant, articles = self._population()
        tasks, truncated = sample_for_labelling(by_variant, articles, 1000, seed=3)
        assert len(tasks) == 100 and truncated

    def test_task_file_round_trip(self, tmp_path):
        by_variant, articles = self._population()
        tasks, _ = sample_for_labelling(by_variant, articles, 5, seed=3)
        path = tmp_path / "tasks.jsonl"
        write_label_tasks(tasks, path)
        again = load_label_tasks(path)
        assert [t.to_json_line() for t in again] == [t.to_json_line() for t in tasks]
        write_label_tasks(again, tmp_path / "tasks2.jsonl")
        assert (tmp_path / "tasks2.jsonl").read_bytes() == path.read_bytes()


class TestCorpusStatistics:
    def test_single_sentence_article(self):
        article = make_article("apo/x", [["a", "b", "a"]], tier="ES")
        rows = corpus_statistics([article])
        row = rows[0]
        assert (row.articles, row.tokens) == (1, 3)
        assert row.sentences_per_article == 1.0
        assert row.tokens_per_sentence == 3.0
        assert row.words_per_article == 2.0

    def test_two_article_fixture_hand_computed(self):
        a1 = make_article("apo/x", [["a", "b", "a"], ["c", "d"]], tier="LS")
        a2 = make_article("apo/y", [["a", "a", "a", "a"]], tier="LS")
        rows = corpus_statistics([a1, a2])
        row = next(r for r in rows if r.source == "apo")
        assert row.articles == 2
        assert row.tokens == 9
        assert row.sentences_per_article == pytest.approx(1.5)
        assert row.tokens_per_sentence == pytest.approx(3.0)
        assert row.words_per_article == pytest.approx(2.5)

    def test_totals_row_equals_pooled_recomputation(self):
        articles = [
            make_article("apo/x", [["a", "b"]], tier="ES"),
            make_article("mdr/y", [["c"], ["d", "e", "f"]], tier="LS"),
            make_article("apo/z", [["g", "h"]], tier="AS"),
        ]
        rows = corpus_statistics(articles)
        total_simple = next(r for r in rows if r.source == "total" and r.tier == "simple")
        assert total_simple.articles == 2
        assert total_simple.tokens == 6
        assert total_simple.sentences_per_article == pytest.approx(1.5)
        total_complex = next(r for r in rows if r.source == "total" and r.tier == "AS")
        assert total_complex.tokens == 2

    def test_statistics_csv_header_only_for_empty_corpus(self):
        csv = statistics_csv(corpus_statistics([]))
        assert csv.splitlines() == [
            "source,tier,articles,tokens,sentences_per_article,tokens_per_sentence,words_per_article"
        ]


class TestGroundTruthFiles:
    def test_round_trip(self, tmp_path):
        truths = [
            GroundTruth("apo/a__apo/b", {(0, 2), (1, 2), (3, 0)}),
            GroundTruth("mdr/c__mdr/d", set()),
        ]
        path = tmp_path / ground_truth_filename("apo/a__apo/b")
        write_ground_truth(truths, path)
        loaded = load_ground_truth_dir(tmp_path)
        assert loaded["apo/a__apo/b"].matches == {(0, 2), (1, 2), (3, 0)}
        assert loaded["mdr/c__mdr/d"].matches == set()

    def test_write_read_write_byte_identical(self, tmp_path):
        truths = [GroundTruth("apo/a__apo/b", {(2, 1), (0, 1)})]
        first = tmp_path / "one.gt"
        second = tmp_path / "two.gt"
        write_ground_truth(truths, first)
        reread = load_ground_truth_dir(tmp_path)
        write_ground_truth(reread.values(), second)
        assert first.read_bytes() == second.read_bytes()

    def test_n_to_1_violation_rejected(self):
        with pytest.raises(ValueError):
            GroundTruth("apo/a__apo/b", {(0, 1), (0, 2)})


class TestLabelStoreFormat:
    def test_round_trip_byte_identical(self, tmp_path):
        records = [
            _label("t1", "match"),
            _label("t2", "no_match", variant="bow-mst-nothr"),
        ]
        path = tmp_path / "labels.jsonl"
        path.write_text("".join(r.to_json_line() + "\n" for r in records), encoding="utf-8")
        loaded = load_labels(path)
        second = tmp_path / "labels2.jsonl"
        second.write_text("".join(r.to_json_line() + "\n" for r in loaded), encoding="utf-8")
        assert second.read_bytes() == path.read_bytes()
