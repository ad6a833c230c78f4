"""Command-line orchestration: ingest -> preprocess -> align -> evaluate -> report."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from .config import ConfigError, RunConfig
from .corpus import CorpusError, read_alignment_output, write_alignment_output
from .embeddings import EmbeddingError
from .evaluation import (
    EvaluationError,
    accuracy_csv,
    corpus_statistics,
    load_ground_truth_dir,
    load_labels,
    sample_for_labelling,
    score_corpus,
    scores_csv,
    statistics_csv,
    write_label_tasks,
)
from .ingest import RuleBasedSplitter, ingest_corpus
from .matching import ThresholdPolicy, align_all, run_variant, variant_name
from .similarity import MEASURES, SimilarityError, sample_similarity_histogram
from .service import ServiceConfig, serve as run_service

MATCHER_NAMES = {"mst": "MST", "mst-lis": "MST-LIS"}

_FAILURES = (
    ConfigError,
    CorpusError,
    EmbeddingError,
    EvaluationError,
    SimilarityError,
    OSError,
    ValueError,
    KeyError,
)


def _output(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def _policy(k: float | None) -> ThresholdPolicy:
    return ThresholdPolicy.none() if k is None else ThresholdPolicy(k=k)


def _needs_vectors(measures: tuple[str, ...]) -> tuple[bool, bool]:
    need_word = any(
        m in ("cosine", "average", "cwasa", "maximum", "bipartite") for m in measures
    )
    need_sentence = "sentence-embedding" in measures
    return need_word, need_sentence


def _write_variant(result, corpus, results_root: Path) -> None:
    out_dir = results_root / result.summary.variant
    if result.alignments:
        write_alignment_output(result.alignments, corpus.articles, out_dir)
    summary = result.summary
    threshold = "none" if summary.threshold_k is None else format(summary.threshold_k, "g")
    csv = (
        "variant,measure,matcher,threshold,matches,average_similarity\n"
        f"{summary.variant},{summary.measure},{summary.matcher},{threshold},"
        f"{summary.matches},{summary.average_similarity:.6f}\n"
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.csv").write_text(csv, encoding="utf-8")


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    default=Path("satzalign.json"),
    show_default=True,
    help="Run configuration file.",
)
@click.option("--verbose", is_flag=True, help="Log warnings and progress to stderr.")
@click.pass_context
def main(ctx: click.Context, config_path: Path, verbose: bool) -> None:
    """Sentence alignment toolkit for German / Simple German article pairs."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.ERROR,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = config_path


def _config(ctx: click.Context) -> RunConfig:
    try:
        return RunConfig.from_file(ctx.obj)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc


@main.command()
@click.pass_context
def ingest(ctx: click.Context) -> None:
    """Build the corpus layout from archived HTML / text articles."""
    cfg = _config(ctx)
    splitter = (
        RuleBasedSplitter(frozenset(cfg.abbreviations)) if cfg.abbreviations else None
    )
    try:
        report = ingest_corpus(cfg.raw_root, cfg.templates_dir, cfg.corpus_root, splitter)
    except _FAILURES as exc:
        raise click.ClickException(f"ingest failed: {exc}") from exc
    click.echo(
        f"ingested {report.articles_written} articles ({report.pairs} pairs); "
        f"{len(report.unusable)} unusable, {len(report.without_partner)} without partner"
    )
    for url in report.unusable:
        click.echo(f"  unusable: {url}", err=True)
    for article_id in report.without_partner:
        click.echo(f"  no partner: {article_id}", err=True)


@main.command()
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.pass_context
def stats(ctx: click.Context, out: Path | None) -> None:
    """Per-source corpus statistics as CSV."""
    cfg = _config(ctx)
    try:
        corpus = cfg.load_corpus()
        _output(statistics_csv(corpus_statistics(corpus.articles.values())), out)
    except _FAILURES as exc:
        raise click.ClickException(f"stats failed: {exc}") from exc


@main.command()
@click.option("--measure", type=click.Choice(MEASURES), required=True)
@click.option("--matcher", type=click.Choice(sorted(MATCHER_NAMES)), required=True)
@click.option("--k", type=float, default=None, help="Threshold factor; omit for no threshold.")
@click.pass_context
def align(ctx: click.Context, measure: str, matcher: str, k: float | None) -> None:
    """Run one alignment variant and write its output directory."""
    cfg = _config(ctx)
    need_word, need_sentence = _needs_vectors((measure,))
    try:
        corpus = cfg.load_corpus()
        context = cfg.build_context(corpus, need_word, need_sentence)
        result = run_variant(
            corpus.pairs, context, measure, MATCHER_NAMES[matcher], _policy(k)
        )
        _write_variant(result, corpus, cfg.results_root)
    except _FAILURES as exc:
        raise click.ClickException(f"align failed: {exc}") from exc
    summary = result.summary
    click.echo(
        f"{summary.variant}: {summary.matches} matches, "
        f"average similarity {summary.average_similarity:.6f}"
    )
    if result.skipped_pairs:
        for pair_id in result.skipped_pairs:
            click.echo(f"  skipped pair: {pair_id}", err=True)
        sys.exit(3)


@main.command("align-all")
@click.option("--k", type=float, default=1.5, show_default=True)
@click.pass_context
def align_all_cmd(ctx: click.Context, k: float) -> None:
    """All 8 measures x 2 matchers x {none, k}: 32 variants plus summary CSV."""
    cfg = _config(ctx)
    try:
        corpus = cfg.load_corpus()
        context = cfg.build_context(corpus, need_word_vectors=True, need_sentence_vectors=True)
        results = align_all(corpus.pairs, context, ks=(k,))
        lines = ["variant,measure,matcher,threshold,matches,average_similarity"]
        skipped = False
        for result in results:
            _write_variant(result, corpus, cfg.results_root)
            summary = result.summary
            threshold = "none" if summary.threshold_k is None else format(summary.threshold_k, "g")
            lines.append(
                f"{summary.variant},{summary.measure},{summary.matcher},{threshold},"
                f"{summary.matches},{summary.average_similarity:.6f}"
            )
            skipped = skipped or bool(result.skipped_pairs)
        cfg.results_root.mkdir(parents=True, exist_ok=True)
        (cfg.results_root / "summary.csv").write_text(
            "\n".join(lines) + "\n", encoding="utf-8"
        )
    except _FAILURES as exc:
        raise click.ClickException(f"align-all failed: {exc}") from exc
    click.echo(f"wrote {len(results)} variants to {cfg.results_root}")
    if skipped:
        sys.exit(3)


@main.command()
@click.option("--measure", type=click.Choice(MEASURES), required=True)
@click.option("--samples", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--bins", type=int, default=None, help="Bin count (default from config).")
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.pass_context
def histogram(
    ctx: click.Context,
    measure: str,
    samples: int,
    seed: int,
    bins: int | None,
    out: Path | None,
) -> None:
    """Similarity histogram over randomly sampled cross-article sentence pairs."""
    cfg = _config(ctx)
    need_word, need_sentence = _needs_vectors((measure,))
    try:
        corpus = cfg.load_corpus()
        context = cfg.build_context(corpus, need_word, need_sentence)
        table = sample_similarity_histogram(
            context, measure, samples, bins or cfg.histogram_bins, seed
        )
    except _FAILURES as exc:
        raise click.ClickException(f"histogram failed: {exc}") from exc
    if table.with_replacement:
        click.echo("note: population smaller than sample size, sampled with replacement", err=True)
    _output(table.to_csv(), out)


@main.command()
@click.option(
    "--ground-truth",
    "ground_truth_dir",
    type=click.Path(path_type=Path),
    default=None,
    help="Directory of .gt files (default from config).",
)
@click.option("--variant", required=True, help="Variant directory name under the results root.")
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.pass_context
def evaluate(
    ctx: click.Context, ground_truth_dir: Path | None, variant: str, out: Path | None
) -> None:
    """Precision / recall / F1 of a variant against the ground truth."""
    cfg = _config(ctx)
    try:
        gold = load_ground_truth_dir(ground_truth_dir or cfg.ground_truth_dir)
        predicted = read_alignment_output(cfg.results_root / variant)
        scores = score_corpus(predicted, gold)
        if not scores:
            raise EvaluationError("no ground truth matches the variant's pairs")
        _output(scores_csv(scores), out)
    except _FAILURES as exc:
        raise click.ClickException(f"evaluate failed: {exc}") from exc


@main.command()
@click.option("--labels", "labels_file", type=click.Path(path_type=Path), default=None)
@click.option("--variant", default=None, help="Restrict to one variant.")
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.pass_context
def accuracy(
    ctx: click.Context, labels_file: Path | None, variant: str | None, out: Path | None
) -> None:
    """Manual alignment classification accuracy from the label store."""
    cfg = _config(ctx)
    try:
        records = load_labels(labels_file or cfg.labels_file)
        _output(accuracy_csv(records, variant), out)
    except _FAILURES as exc:
        raise click.ClickException(f"accuracy failed: {exc}") from exc


@main.command("sample-labels")
@click.option("--n", "sample_size", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.pass_context
def sample_labels(
    ctx: click.Context, sample_size: int, seed: int, out: Path | None
) -> None:
    """Sample matches across all aligned variants into a labelling task file."""
    cfg = _config(ctx)
    try:
        corpus = cfg.load_corpus()
        by_variant = {}
        if cfg.results_root.is_dir():
            for variant_dir in sorted(cfg.results_root.iterdir()):
                if (variant_dir / "matches.json").is_file():
                    by_variant[variant_dir.name] = read_alignment_output(variant_dir)
        if not by_variant:
            raise EvaluationError(f"no alignment outputs under {cfg.results_root}")
        tasks, truncated = sample_for_labelling(by_variant, corpus.articles, sample_size, seed)
        write_label_tasks(tasks, out or cfg.tasks_file)
    except _FAILURES as exc:
        raise click.ClickException(f"sample-labels failed: {exc}") from exc
    if truncated:
        click.echo("note: population smaller than requested sample, returned all", err=True)
    click.echo(f"wrote {len(tasks)} tasks to {out or cfg.tasks_file}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.pass_context
def serve(ctx: click.Context, host: str, port: int) -> None:
    """Run the annotation service (ground truth + blind classification)."""
    cfg = _config(ctx)
    service_config = ServiceConfig(
        corpus_root=cfg.corpus_root if cfg.corpus_root.is_dir() else None,
        tasks_file=cfg.tasks_file,
        labels_file=cfg.labels_file,
        ground_truth_dir=cfg.ground_truth_dir,
        ui_dist=cfg.ui_dist,
        token=cfg.service_token,
    )
    try:
        run_service(service_config, host=host, port=port)
    except _FAILURES as exc:
        raise click.ClickException(f"serve failed: {exc}") from exc


if __name__ == "__main__":
    main()
