"""Declarative run configuration: one JSON document supplies every path.

Relative paths are resolved against the config file's directory so a run
is reproducible from the single artifact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, load_corpus
from .embeddings import (
    RemoteSentenceVectors,
    SentenceVectorProvider,
    SentenceVectorTable,
    WordVectorStore,
    load_word_vectors,
)
from .similarity import SimilarityContext


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    base_dir: Path
    corpus_root: Path
    raw_root: Path
    templates_dir: Path
    results_root: Path
    ground_truth_dir: Path
    labels_file: Path
    tasks_file: Path
    word_vectors: Path | None = None
    sentence_vectors: dict | None = None
    ui_dist: Path | None = None
    service_token: str | None = None
    abbreviations: list[str] | None = None
    histogram_bins: int = 20
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        base = path.parent

        def resolve(key: str, default: str) -> Path:
            return base / data.get(key, default)

        word_vectors = base / data["word_vectors"] if data.get("word_vectors") else None
        ui_dist = base / data["ui_dist"] if data.get("ui_dist") else None
        return cls(
            base_dir=base,
            corpus_root=resolve("corpus_root", "corpus"),
            raw_root=resolve("raw_root", "raw"),
            templates_dir=resolve("templates_dir", "templates"),
            results_root=resolve("results_root", "corpus/results"),
            ground_truth_dir=resolve("ground_truth_dir", "ground_truth"),
            labels_file=resolve("labels_file", "labels.jsonl"),
            tasks_file=resolve("tasks_file", "tasks.jsonl"),
            word_vectors=word_vectors,
            sentence_vectors=data.get("sentence_vectors"),
            ui_dist=ui_dist,
            service_token=data.get("service_token"),
            abbreviations=data.get("abbreviations"),
            histogram_bins=int(data.get("histogram_bins", 20)),
            raw=data,
        )

    def load_corpus(self) -> Corpus:
        return load_corpus(self.corpus_root)

    def word_store(self) -> WordVectorStore:
        if self.word_vectors is None:
            raise ConfigError("config needs 'word_vectors' for embedding-based measures")
        return load_word_vectors(self.word_vectors)

    def sentence_provider(self) -> SentenceVectorProvider:
        spec = self.sentence_vectors
        if not spec:
            raise ConfigError("config needs 'sentence_vectors' for the sentence-embedding measure")
        kind = spec.get("kind")
        if kind == "file":
            return SentenceVectorTable.from_file(self.base_dir / spec["path"])
        if kind == "remote":
            return RemoteSentenceVectors(spec["url"])
        raise ConfigError(f"sentence_vectors kind must be 'file' or 'remote', got {kind!r}")

    def build_context(
        self,
        corpus: Corpus,
        need_word_vectors: bool = False,
        need_sentence_vectors: bool = False,
    ) -> SimilarityContext:
        word_store = self.word_store() if need_word_vectors else None
        provider = self.sentence_provider() if need_sentence_vectors else None
        return SimilarityContext.build(
            corpus.articles, word_store=word_store, sentence_provider=provider
        )
