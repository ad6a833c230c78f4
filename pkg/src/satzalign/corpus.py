"""Domain model and on-disk layout for the article-aligned corpus.

Directory layout::

    <root>/<source>/manifest.json
    <root>/<source>/parsed/<slug>.txt          one sentence per line
    <root>/results/<variant>/<stem>.simple.txt
    <root>/results/<variant>/<stem>.complex.txt
    <root>/results/<variant>/matches.json

All text files are UTF-8 with LF line endings.  Article ids are
``{source}/{url-path-slug}``; the pair-file stem replaces "/" with "+"
so it stays a single path segment.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

logger = logging.getLogger(__name__)

LANGUAGE_TIERS = ("AS", "ES", "LS")
MATCHERS = ("MST", "MST-LIS")

#: Decimal digits kept when similarity values are serialized.
SIMILARITY_DIGITS = 6
#: Tolerance when comparing a re-read similarity against the original.
SIMILARITY_TOLERANCE = 1e-6


class CorpusError(Exception):
    """Fatal problem with the corpus layout (missing manifest, bad write target)."""


def round_similarity(value: float) -> float:
    """Round to the serialized precision (round-half-even via str formatting)."""
    return float(f"{value:.{SIMILARITY_DIGITS}f}")


def slugify(text: str) -> str:
    """Deterministic filesystem-safe slug: lowercase, non-alphanumerics -> '-'."""
    slug = re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")
    return slug or "index"


def url_slug(url: str) -> str:
    """Slug of the path component of a URL (scheme and host dropped)."""
    stripped = re.sub(r"^[a-z][a-z0-9+.-]*://", "", url.strip())
    host, _, path = stripped.partition("/")
    return slugify(path if path.strip("/") else host)


@dataclass
class Sentence:
    """One sentence of an article.

    ``tokens`` and ``char_stream`` are empty until preprocessing has run;
    ``raw_text`` is the published corpus text and is never modified.
    """

    index: int
    raw_text: str
    tokens: list[str] = field(default_factory=list)
    char_stream: str = ""


@dataclass
class Article:
    id: str
    source: str
    url: str
    crawl_date: str
    publication_date: str | None
    language_tier: str
    sentences: list[Sentence] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.language_tier not in LANGUAGE_TIERS:
            raise ValueError(
                f"language_tier must be one of {LANGUAGE_TIERS}, got {self.language_tier!r}"
            )

    @property
    def is_simple(self) -> bool:
        return self.language_tier != "AS"


@dataclass
class ArticlePair:
    """One simple article bound to one complex (AS) article."""

    simple: Article
    complex: Article

    def __post_init__(self) -> None:
        if self.simple.language_tier == "AS":
            raise ValueError(f"simple side of pair {self.simple.id} has tier AS")
        if self.complex.language_tier != "AS":
            raise ValueError(
                f"complex side of pair {self.complex.id} has tier {self.complex.language_tier}"
            )

    @property
    def pair_id(self) -> str:
        return f"{self.simple.id}__{self.complex.id}"


def pair_file_stem(pair_id: str) -> str:
    """Single-path-segment stem for per-pair files."""
    return pair_id.replace("/", "+")


class Match(NamedTuple):
    simple_index: int
    complex_index: int
    similarity: float


@dataclass
class AlignmentSet:
    """Matches for one article pair under the n:1 constraint."""

    pair_id: str
    measure: str
    matcher: str
    threshold_k: float | None
    matches: list[Match] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.matcher not in MATCHERS:
            raise ValueError(f"matcher must be one of {MATCHERS}, got {self.matcher!r}")
        seen = set()
        for match in self.matches:
            if match.simple_index in seen:
                raise ValueError(
                    f"n:1 violation: simple index {match.simple_index} matched twice"
                )
            seen.add(match.simple_index)


@dataclass
class ManifestEntry:
    url: str
    crawl_date: str
    publication_date: str | None
    simple: bool
    language_tier: str
    associated: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "url": self.url,
            "crawl_date": self.crawl_date,
            "publication_date": self.publication_date,
            "simple": self.simple,
            "language_tier": self.language_tier,
            "associated": list(self.associated),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ManifestEntry":
        entry = cls(
            url=data["url"],
            crawl_date=data["crawl_date"],
            publication_date=data.get("publication_date"),
            simple=bool(data["simple"]),
            language_tier=data["language_tier"],
            associated=list(data.get("associated", [])),
        )
        if entry.language_tier not in LANGUAGE_TIERS:
            raise ValueError(f"bad language_tier {entry.language_tier!r}")
        if entry.simple != (entry.language_tier != "AS"):
            raise ValueError(
                f"simple flag {entry.simple} inconsistent with tier {entry.language_tier}"
            )
        return entry


@dataclass
class CorpusManifest:
    """Per-source article metadata, keyed by article id."""

    sources: dict[str, dict[str, ManifestEntry]] = field(default_factory=dict)

    def entry(self, article_id: str) -> ManifestEntry | None:
        source = article_id.split("/", 1)[0]
        return self.sources.get(source, {}).get(article_id)

    def all_ids(self) -> set[str]:
        ids: set[str] = set()
        for entries in self.sources.values():
            ids.update(entries)
        return ids


@dataclass
class Corpus:
    root: Path
    manifest: CorpusManifest
    articles: dict[str, Article]
    pairs: list[ArticlePair]
    warnings: list[str] = field(default_factory=list)

    def pair_by_id(self, pair_id: str) -> ArticlePair | None:
        for pair in self.pairs:
            if pair.pair_id == pair_id:
                return pair
        return None


def _dump_json(data, path: Path) -> None:
    path.write_text(
        json.dumps(data, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def load_corpus(root: str | Path) -> Corpus:
    """Load every source under ``root``.

    A missing per-source manifest is fatal.  Malformed manifest entries and
    entries without a readable text file are skipped with a diagnostic.
    Simple articles whose associated complex articles all fail to resolve
    are excluded, mirroring the discard rule for unusable originals.
    """
    root = Path(root)
    manifest = CorpusManifest()
    articles: dict[str, Article] = {}
    warnings: list[str] = []

    source_dirs = sorted(
        d for d in root.iterdir() if d.is_dir() and d.name != "results"
    ) if root.is_dir() else []
    for source_dir in source_dirs:
        source = source_dir.name
        manifest_path = source_dir / "manifest.json"
        if not manifest_path.is_file():
            raise CorpusError(f"missing manifest: {manifest_path}")
        raw = json.loads(manifest_path.read_text(encoding="utf-8"))
        entries: dict[str, ManifestEntry] = {}
        for article_id in sorted(raw):
            try:
                entry = ManifestEntry.from_json(raw[article_id])
            except (KeyError, TypeError, ValueError) as exc:
                warnings.append(f"{source}: malformed entry {article_id!r}: {exc}")
                continue
            slug = article_id.split("/", 1)[-1]
            text_path = source_dir / "parsed" / f"{slug}.txt"
            if not text_path.is_file():
                warnings.append(f"{source}: missing text file for {article_id!r}")
                continue
            lines = [
                line for line in text_path.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
            entries[article_id] = entry
            articles[article_id] = Article(
                id=article_id,
                source=source,
                url=entry.url,
                crawl_date=entry.crawl_date,
                publication_date=entry.publication_date,
                language_tier=entry.language_tier,
                sentences=[Sentence(index=i, raw_text=text) for i, text in enumerate(lines)],
            )
        manifest.sources[source] = entries

    pairs: list[ArticlePair] = []
    excluded: set[str] = set()
    for article_id in sorted(articles):
        article = articles[article_id]
        if not article.is_simple:
            continue
        entry = manifest.entry(article_id)
        partners = []
        for assoc in entry.associated if entry else []:
            partner = articles.get(assoc)
            if partner is None:
                warnings.append(
                    f"{article_id}: associated article {assoc!r} not found"
                )
            elif partner.language_tier == "AS":
                partners.append(partner)
        if not partners:
            warnings.append(f"{article_id}: no resolvable complex partner, excluded")
            excluded.add(article_id)
            continue
        for partner in partners:
            pairs.append(ArticlePair(simple=article, complex=partner))

    for article_id in excluded:
        del articles[article_id]
    for message in warnings:
        logger.warning("%s", message)
    return Corpus(root=root, manifest=manifest, articles=articles, pairs=pairs, warnings=warnings)


def write_corpus(corpus: Corpus, root: str | Path) -> None:
    """Write manifest + parsed text files; inverse of :func:`load_corpus`."""
    root = Path(root)
    for source in sorted(corpus.manifest.sources):
        entries = corpus.manifest.sources[source]
        source_dir = root / source
        (source_dir / "parsed").mkdir(parents=True, exist_ok=True)
        payload = {}
        for article_id in sorted(entries):
            if article_id not in corpus.articles:
                continue
            payload[article_id] = entries[article_id].to_json()
            article = corpus.articles[article_id]
            slug = article_id.split("/", 1)[-1]
            text = "".join(s.raw_text + "\n" for s in article.sentences)
            (source_dir / "parsed" / f"{slug}.txt").write_text(text, encoding="utf-8")
        _dump_json(payload, source_dir / "manifest.json")


def write_alignment_output(
    alignment_sets: Iterable[AlignmentSet],
    articles: dict[str, Article],
    out_dir: str | Path,
) -> None:
    """Write line-parallel pair files plus the per-variant results manifest.

    Line i of ``<stem>.simple.txt`` corresponds to line i of
    ``<stem>.complex.txt``.  Output is byte-stable for identical input.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CorpusError(f"cannot create output directory {out_dir}: {exc}") from exc

    ordered = sorted(alignment_sets, key=lambda a: a.pair_id)
    if not ordered:
        raise ValueError("write_alignment_output needs at least one alignment set")
    head = ordered[0]
    pairs_payload = []
    for aset in ordered:
        if (aset.measure, aset.matcher, aset.threshold_k) != (
            head.measure,
            head.matcher,
            head.threshold_k,
        ):
            raise ValueError("alignment sets of one variant must share measure/matcher/k")
        simple_id, complex_id = aset.pair_id.split("__", 1)
        simple_article = articles[simple_id]
        complex_article = articles[complex_id]
        stem = pair_file_stem(aset.pair_id)
        matches = sorted(aset.matches, key=lambda m: m.simple_index)
        simple_lines = []
        complex_lines = []
        match_payload = []
        for match in matches:
            s_text = simple_article.sentences[match.simple_index].raw_text
            c_text = complex_article.sentences[match.complex_index].raw_text
            simple_lines.append(s_text)
            complex_lines.append(c_text)
            match_payload.append(
                {
                    "simple_index": match.simple_index,
                    "complex_index": match.complex_index,
                    "similarity": round_similarity(match.similarity),
                    "simple_text": s_text,
                    "complex_text": c_text,
                }
            )
        (out_dir / f"{stem}.simple.txt").write_text(
            "".join(line + "\n" for line in simple_lines), encoding="utf-8"
        )
        (out_dir / f"{stem}.complex.txt").write_text(
            "".join(line + "\n" for line in complex_lines), encoding="utf-8"
        )
        pairs_payload.append(
            {
                "pair_id": aset.pair_id,
                "simple_article": simple_id,
                "complex_article": complex_id,
                "matches": match_payload,
            }
        )

    _dump_json(
        {
            "measure": head.measure,
            "matcher": head.matcher,
            "threshold_k": head.threshold_k,
            "pairs": pairs_payload,
        },
        out_dir / "matches.json",
    )


def read_alignment_output(out_dir: str | Path) -> list[AlignmentSet]:
    """Re-read a variant directory written by :func:`write_alignment_output`."""
    out_dir = Path(out_dir)
    data = json.loads((out_dir / "matches.json").read_text(encoding="utf-8"))
    sets = []
    for pair in data["pairs"]:
        matches = [
            Match(m["simple_index"], m["complex_index"], float(m["similarity"]))
            for m in pair["matches"]
        ]
        sets.append(
            AlignmentSet(
                pair_id=pair["pair_id"],
                measure=data["measure"],
                matcher=data["matcher"],
                threshold_k=data["threshold_k"],
                matches=matches,
            )
        )
    return sets
