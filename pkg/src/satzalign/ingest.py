"""Turn archived HTML or plain text into article sentence lists.

Extraction templates are declarative per-source config files; an
element-path rule is a space-separated chain of steps, each step being
``tag``, ``tag.class``, ``.class``, ``tag#id`` or ``#id`` (``*`` matches
any tag).  Earlier steps must match ancestors of the element matched by
the final step.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Callable

from .corpus import (
    Article,
    Corpus,
    CorpusError,
    CorpusManifest,
    ManifestEntry,
    Sentence,
    url_slug,
    write_corpus,
)

logger = logging.getLogger(__name__)

SentenceSplitter = Callable[[str], list[str]]

TERMINAL_PUNCTUATION = ".!?:;,"

DEFAULT_ABBREVIATIONS = frozenset(
    {
        "z.B.", "Dr.", "bzw.", "ca.", "Nr.", "usw.", "etc.", "u.a.",
        "d.h.", "Abs.", "St.", "Mio.", "Mrd.", "Prof.", "vgl.", "ggf.",
    }
)

_VOID_TAGS = frozenset(
    {"br", "hr", "img", "meta", "link", "input", "area", "base", "col",
     "embed", "source", "track", "wbr"}
)
_SKIP_TAGS = frozenset(
    {"script", "style", "noscript", "template", "iframe", "svg", "img",
     "video", "audio", "canvas", "object", "embed", "form", "button",
     "input", "select", "option", "head", "meta", "link", "title"}
)
_BLOCK_TAGS = frozenset(
    {"p", "div", "section", "article", "main", "aside", "header", "footer",
     "nav", "h1", "h2", "h3", "h4", "h5", "h6", "table", "tr", "blockquote",
     "pre", "figure", "figcaption", "dl", "dt", "dd", "br", "hr", "li"}
)


class UnusableArticleError(Exception):
    """Raised when no usable main content can be extracted."""


@dataclass
class ExtractionTemplate:
    source: str
    content_rules: list[str]
    exclude_rules: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.content_rules:
            raise ValueError(f"template for {self.source!r} needs at least one content rule")

    @classmethod
    def from_file(cls, path: str | Path) -> "ExtractionTemplate":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            source=data["source"],
            content_rules=list(data["content_rules"]),
            exclude_rules=list(data.get("exclude_rules", [])),
        )


class _Node:
    __slots__ = ("tag", "attrs", "children", "parent")

    def __init__(self, tag: str, attrs: dict[str, str], parent: "_Node | None"):
        self.tag = tag
        self.attrs = attrs
        self.children: list[object] = []
        self.parent = parent


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = _Node("[document]", {}, None)
        self._stack = [self.root]

    def handle_starttag(self, tag, attrs):
        node = _Node(tag, dict(attrs), self._stack[-1])
        self._stack[-1].children.append(node)
        if tag not in _VOID_TAGS:
            self._stack.append(node)

    def handle_startendtag(self, tag, attrs):
        self._stack[-1].children.append(_Node(tag, dict(attrs), self._stack[-1]))

    def handle_endtag(self, tag):
        for depth in range(len(self._stack) - 1, 0, -1):
            if self._stack[depth].tag == tag:
                del self._stack[depth:]
                return
        # Unmatched end tag: lenient parsing, ignore.

    def handle_data(self, data):
        if data:
            self._stack[-1].children.append(data)


def parse_html(text: str) -> _Node:
    builder = _TreeBuilder()
    builder.feed(text)
    builder.close()
    return builder.root


_STEP_RE = re.compile(r"^(\*|[a-zA-Z][\w-]*)?(#[\w-]+)?((?:\.[\w-]+)*)$")


def _step_matches(node: _Node, step: str) -> bool:
    match = _STEP_RE.match(step)
    if not match:
        raise ValueError(f"bad element-path step: {step!r}")
    tag, node_id, classes = match.groups()
    if tag and tag != "*" and node.tag != tag.lower():
        return False
    if node_id and node.attrs.get("id") != node_id[1:]:
        return False
    if classes:
        have = set(node.attrs.get("class", "").split())
        if not all(cls in have for cls in classes.split(".")[1:]):
            return False
    return True


def rule_matches(node: _Node, rule: str) -> bool:
    steps = rule.split()
    if not steps or not _step_matches(node, steps[-1]):
        return False
    ancestor = node.parent
    for step in reversed(steps[:-1]):
        while ancestor is not None and not _step_matches(ancestor, step):
            ancestor = ancestor.parent
        if ancestor is None:
            return False
        ancestor = ancestor.parent
    return True


def _matches_any(node: _Node, rules: list[str]) -> bool:
    return any(rule_matches(node, rule) for rule in rules)


def flatten_enumerations(items: list[str]) -> str:
    """Join enumeration items into comma-separated running text.

    Terminal punctuation of non-final items is stripped before joining;
    the final item keeps its punctuation or receives "." if it has none.
    """
    cleaned = [item.strip() for item in items if item.strip()]
    if not cleaned:
        return ""
    parts = [item.rstrip(TERMINAL_PUNCTUATION).rstrip() for item in cleaned[:-1]]
    last = cleaned[-1]
    if last[-1] not in TERMINAL_PUNCTUATION:
        last += "."
    parts.append(last)
    return ", ".join(p for p in parts if p)


def _collapse_ws(text: str) -> str:
    return " ".join(text.split())


def _plain_text(node: _Node, exclude_rules: list[str]) -> str:
    chunks: list[str] = []

    def walk(current: _Node) -> None:
        for child in current.children:
            if isinstance(child, str):
                chunks.append(child)
            elif child.tag in _SKIP_TAGS or _matches_any(child, exclude_rules):
                continue
            else:
                walk(child)

    walk(node)
    return _collapse_ws("".join(chunks))


def _emit_paragraphs(node: _Node, exclude_rules: list[str], paragraphs: list[str]) -> None:
    fragments: list[str] = []

    def flush() -> None:
        text = _collapse_ws("".join(fragments))
        fragments.clear()
        if text:
            paragraphs.append(text)

    def walk(current: _Node) -> None:
        for child in current.children:
            if isinstance(child, str):
                fragments.append(child)
                continue
            if child.tag in _SKIP_TAGS or _matches_any(child, exclude_rules):
                continue
            if child.tag in ("ul", "ol"):
                flush()
                items = [
                    _plain_text(li, exclude_rules)
                    for li in child.children
                    if isinstance(li, _Node)
                    and li.tag == "li"
                    and not _matches_any(li, exclude_rules)
                ]
                text = flatten_enumerations([i for i in items if i])
                if text:
                    paragraphs.append(text)
            elif child.tag in _BLOCK_TAGS:
                flush()
                walk(child)
                flush()
            else:
                walk(child)

    walk(node)
    flush()


def _find_content_nodes(root: _Node, rules: list[str]) -> list[_Node]:
    found: list[_Node] = []

    def walk(node: _Node) -> None:
        for child in node.children:
            if not isinstance(child, _Node):
                continue
            if _matches_any(child, rules):
                found.append(child)
            else:
                walk(child)

    walk(root)
    return found


def extract_text(html: str, template: ExtractionTemplate) -> str:
    """Extract main-content text; raises :class:`UnusableArticleError`.

    Tags are stripped, enumerations are flattened to comma-separated text
    and each emitted paragraph becomes one line of the result.
    """
    root = parse_html(html)
    content_nodes = _find_content_nodes(root, template.content_rules)
    paragraphs: list[str] = []
    for node in content_nodes:
        if _matches_any(node, template.exclude_rules):
            continue
        _emit_paragraphs(node, template.exclude_rules, paragraphs)
    text = "\n".join(paragraphs)
    if not text.strip():
        raise UnusableArticleError(
            f"unusable article: no main content matched for source {template.source!r}"
        )
    return text


class RuleBasedSplitter:
    """Default sentence splitter.

    Splits after ".", "?" or "!" followed by whitespace and an uppercase
    letter or digit; a configurable abbreviation list suppresses splits
    after tokens like "Dr." or "z.B.".  Newlines are hard boundaries.
    """

    def __init__(self, abbreviations: frozenset[str] | set[str] = DEFAULT_ABBREVIATIONS):
        self.abbreviations = frozenset(abbreviations)

    def __call__(self, text: str) -> list[str]:
        text = text.replace("\r\n", "\n").replace("\r", "\n")
        sentences: list[str] = []
        buffer: list[str] = []

        def flush() -> None:
            sentence = _collapse_ws("".join(buffer))
            buffer.clear()
            if sentence:
                sentences.append(sentence)

        i = 0
        n = len(text)
        while i < n:
            char = text[i]
            if char == "\n":
                flush()
                i += 1
                continue
            buffer.append(char)
            if char in ".?!":
                while i + 1 < n and text[i + 1] in ".?!":
                    i += 1
                    buffer.append(text[i])
                j = i + 1
                saw_space = False
                while j < n and text[j] in " \t":
                    saw_space = True
                    j += 1
                if saw_space and j < n and (text[j].isupper() or text[j].isdigit()):
                    if not self._ends_with_abbreviation(buffer):
                        flush()
            i += 1
        flush()
        return sentences

    def _ends_with_abbreviation(self, buffer: list[str]) -> bool:
        if buffer[-1] != ".":
            return False
        start = len(buffer)
        while start > 0 and not buffer[start - 1].isspace():
            start -= 1
        return "".join(buffer[start:]) in self.abbreviations


class PrecomputedSplitter:
    """Splitter substitute fed from an external tool's output."""

    def __init__(self, sentences_by_text: dict[str, list[str]]):
        self.sentences_by_text = sentences_by_text

    def __call__(self, text: str) -> list[str]:
        return list(self.sentences_by_text[text])


def split_sentences(text: str, splitter: SentenceSplitter | None = None) -> list[str]:
    return (splitter or RuleBasedSplitter())(text)


@dataclass
class IngestReport:
    articles_written: int = 0
    pairs: int = 0
    unusable: list[str] = field(default_factory=list)
    without_partner: list[str] = field(default_factory=list)


def load_templates(templates_dir: str | Path) -> dict[str, ExtractionTemplate]:
    templates = {}
    templates_dir = Path(templates_dir)
    if templates_dir.is_dir():
        for path in sorted(templates_dir.glob("*.json")):
            template = ExtractionTemplate.from_file(path)
            templates[template.source] = template
    return templates


def ingest_corpus(
    raw_root: str | Path,
    templates_dir: str | Path,
    corpus_root: str | Path,
    splitter: SentenceSplitter | None = None,
) -> IngestReport:
    """Build the corpus layout from archived HTML / plain-text articles.

    Input layout: ``<raw_root>/<source>/articles.json`` listing entries with
    ``url``, ``file``, ``crawl_date``, optional ``publication_date``,
    ``simple``, ``language_tier`` and ``associated`` (partner URLs).
    """
    raw_root = Path(raw_root)
    splitter = splitter or RuleBasedSplitter()
    templates = load_templates(templates_dir)
    report = IngestReport()

    manifest = CorpusManifest()
    articles: dict[str, Article] = {}
    id_by_url: dict[str, str] = {}
    associated_urls: dict[str, list[str]] = {}

    for source_dir in sorted(d for d in raw_root.iterdir() if d.is_dir()):
        source = source_dir.name
        index_path = source_dir / "articles.json"
        if not index_path.is_file():
            raise CorpusError(f"missing article index: {index_path}")
        entries = json.loads(index_path.read_text(encoding="utf-8"))
        manifest.sources[source] = {}
        used_slugs: set[str] = set()
        for entry in entries:
            url = entry["url"]
            file_path = source_dir / entry["file"]
            try:
                payload = file_path.read_text(encoding="utf-8", errors="replace")
                if file_path.suffix.lower() in (".html", ".htm"):
                    if source not in templates:
                        raise CorpusError(f"no extraction template for source {source!r}")
                    text = extract_text(payload, templates[source])
                else:
                    text = payload
                sentences = splitter(text)
                if not sentences:
                    raise UnusableArticleError(f"unusable article: no sentences in {url}")
            except UnusableArticleError as exc:
                report.unusable.append(url)
                logger.warning("%s", exc)
                continue
            slug = url_slug(url)
            while slug in used_slugs:
                slug += "-2"
            used_slugs.add(slug)
            article_id = f"{source}/{slug}"
            id_by_url[url] = article_id
            associated_urls[article_id] = list(entry.get("associated", []))
            manifest.sources[source][article_id] = ManifestEntry(
                url=url,
                crawl_date=entry["crawl_date"],
                publication_date=entry.get("publication_date"),
                simple=bool(entry["simple"]),
                language_tier=entry["language_tier"],
            )
            articles[article_id] = Article(
                id=article_id,
                source=source,
                url=url,
                crawl_date=entry["crawl_date"],
                publication_date=entry.get("publication_date"),
                language_tier=entry["language_tier"],
                sentences=[Sentence(index=i, raw_text=s) for i, s in enumerate(sentences)],
            )

    # Resolve partner URLs to ids; discard simple articles left without a
    # usable complex partner.
    for article_id, urls in associated_urls.items():
        entry = manifest.entry(article_id)
        entry.associated = sorted(
            id_by_url[u] for u in urls if u in id_by_url
        )
    dropped: set[str] = set()
    pair_count = 0
    for article_id in sorted(articles):
        article = articles[article_id]
        if not article.is_simple:
            continue
        entry = manifest.entry(article_id)
        partners = [
            a for a in entry.associated
            if a in articles and articles[a].language_tier == "AS"
        ]
        if not partners:
            report.without_partner.append(article_id)
            dropped.add(article_id)
        else:
            pair_count += len(partners)
    for article_id in dropped:
        source = article_id.split("/", 1)[0]
        del articles[article_id]
        del manifest.sources[source][article_id]

    corpus = Corpus(
        root=Path(corpus_root),
        manifest=manifest,
        articles=articles,
        pairs=[],
    )
    write_corpus(corpus, corpus_root)
    report.articles_written = len(articles)
    report.pairs = pair_count
    return report
