"""Article data model, ingestion, tokenization, sentence splitting and truncation."""
from __future__ import annotations

import dataclasses
import datetime as dt
import json
import logging
import re
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple

from .frames import Frame

logger = logging.getLogger(__name__)

DEFAULT_LANGUAGES = ("ru", "fr", "es", "it")
WORD_LIMIT = 225
MIN_CHARS = 300

# Hyphenated compounds stay one token; apostrophes split (l'homme -> l, homme).
_TOKEN_RE = re.compile(r"[^\W_]+(?:[-‐‑][^\W_]+)*")
_TERMINATOR_RE = re.compile(r"(?:[.!?…]+)[\"'»”’)\]]*(?=\s|$)")


@dataclasses.dataclass(frozen=True)
class Article:
    id: str
    language: str
    published_at: dt.date
    outlet: str
    body: str
    report_id: str | None = None
    region: str | None = None

    def replace(self, **changes) -> "Article":
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True)
class AnnotatedSpan:
    doc_id: str
    sentence: str
    frame: Frame
    annotator_count: int = 1

    def __post_init__(self):
        if self.annotator_count < 1:
            raise ValueError(f"annotator_count must be >= 1, got {self.annotator_count}")


class Ingested(NamedTuple):
    """Outcome of reading an article file."""

    articles: list[Article]
    malformed: int
    too_short: int
    duplicates: int


def _read_records(path: Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                yield lineno, None
                continue
            yield lineno, record if isinstance(record, dict) else None


def load_articles(
    path,
    min_chars: int = MIN_CHARS,
    languages: Iterable[str] | None = None,
    region_table: dict[str, str] | None = None,
) -> Ingested:
    """Read a line-delimited JSON article file.

    Records without a usable ``id``, ``language``, ``published_at``, ``outlet``
    or ``body`` are skipped and counted as malformed, as are records in a
    language outside ``languages``. Bodies shorter than ``min_chars`` are
    dropped. Repeated ids keep their first occurrence. When a record carries a
    ``country`` but no ``region``, the region is looked up in ``region_table``.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"article file not found: {path}")
    allowed = set(languages) if languages is not None else None
    articles: list[Article] = []
    seen: set[str] = set()
    malformed = too_short = duplicates = 0
    for lineno, record in _read_records(path):
        try:
            if record is None:
                raise ValueError("not a JSON object")
            language = str(record["language"]).lower()
            if allowed is not None and language not in allowed:
                raise ValueError(f"language {language!r} not configured")
            body = record["body"]
            if not isinstance(body, str):
                raise ValueError("body is not text")
            region = record.get("region")
            if region is None and region_table and record.get("country"):
                region = region_table.get(record["country"])
            article = Article(
                id=str(record["id"]),
                language=language,
                published_at=dt.date.fromisoformat(str(record["published_at"])[:10]),
                outlet=str(record["outlet"]),
                body=body,
                report_id=None if record.get("report_id") is None else str(record["report_id"]),
                region=region,
            )
        except (KeyError, ValueError, TypeError) as exc:
            malformed += 1
            logger.warning("%s:%d: skipping malformed record (%s)", path, lineno, exc)
            continue
        if len(article.body) < min_chars or not article.body.strip():
            too_short += 1
            continue
        if article.id in seen:
            duplicates += 1
            continue
        seen.add(article.id)
        articles.append(article)
    if malformed:
        logger.warning("%s: %d malformed record(s) skipped", path, malformed)
    return Ingested(articles, malformed, too_short, duplicates)


def load_spans(path) -> Ingested:
    """Read an annotated-span file (doc_id, sentence, frame_code, annotator_count).

    Returns an :class:`Ingested` whose ``articles`` slot holds the spans.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"span file not found: {path}")
    spans: list[AnnotatedSpan] = []
    malformed = 0
    for lineno, record in _read_records(path):
        try:
            if record is None:
                raise ValueError("not a JSON object")
            spans.append(AnnotatedSpan(
                doc_id=str(record["doc_id"]),
                sentence=str(record["sentence"]),
                frame=Frame.from_code(record["frame_code"]),
                annotator_count=int(record.get("annotator_count", 1)),
            ))
        except (KeyError, ValueError, TypeError) as exc:
            malformed += 1
            logger.warning("%s:%d: skipping malformed span (%s)", path, lineno, exc)
    return Ingested(spans, malformed, 0, 0)


def write_articles(articles: Iterable[Article], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for a in articles:
            record = dataclasses.asdict(a)
            record["published_at"] = a.published_at.isoformat()
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


@lru_cache(maxsize=None)
def abbreviations(language: str) -> frozenset[str]:
    """Lowercased abbreviations (without the final period) that never end a sentence."""
    name = f"abbrev_{language}.txt"
    data = resources.files("polyframe.data")
    if not data.joinpath(name).is_file():
        return frozenset()
    text = data.joinpath(name).read_text(encoding="utf-8")
    return frozenset(ln.strip().lower().rstrip(".") for ln in text.splitlines()
                     if ln.strip() and not ln.startswith("#"))


def _is_abbreviation(text: str, dot: int, abbrevs: frozenset[str]) -> bool:
    start = dot
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:dot].lstrip("\"'(«“[")
    # A single capital letter followed by a name or another initial is a
    # personal initial ("V. Putin", "J. K. Rowling").
    if len(word) == 1 and word.isupper():
        nxt = re.match(r"\s+(\w+)(\.?)", text[dot + 1:])
        if nxt and nxt.group(1)[0].isupper():
            name = nxt.group(1)
            if len(name) > 1 or nxt.group(2) == ".":
                return True
    word = word.lower()
    # Elided articles ("l'avv.") attach to the abbreviation.
    return word in abbrevs or re.split("['’]", word)[-1] in abbrevs


def sentence_spans(text: str, language: str) -> list[tuple[int, int]]:
    """Character offsets ``(start, end)`` of each sentence, whitespace trimmed."""
    abbrevs = abbreviations(language)
    cuts = []
    for m in _TERMINATOR_RE.finditer(text):
        term = text[m.start():m.end()].rstrip("\"'»”’)]")
        if term == "." and _is_abbreviation(text, m.start(), abbrevs):
            continue
        rest = text[m.end():].lstrip()
        # A sentence cannot open with a lowercase letter.
        if rest and rest[0].islower():
            continue
        cuts.append(m.end())
    spans = []
    start = 0
    for end in cuts + [len(text)]:
        seg = text[start:end]
        lead = len(seg) - len(seg.lstrip())
        trail = len(seg.rstrip())
        if seg.strip():
            spans.append((start + lead, start + trail))
        start = end
    return spans


def split_sentences(text: str, language: str) -> list[str]:
    """Split text into sentences with a rule-based, abbreviation-aware splitter."""
    return [text[s:e] for s, e in sentence_spans(text, language)]


def tokenize(text: str, language: str | None = None) -> list[str]:
    """Lowercased Unicode word tokens; punctuation dropped, digits kept."""
    return [m.group().lower() for m in _TOKEN_RE.finditer(text)]


def token_spans(text: str) -> list[tuple[str, int, int]]:
    """Tokens with their character offsets in ``text`` (original casing)."""
    return [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def truncate_text(text: str, language: str, word_limit: int = WORD_LIMIT) -> str:
    if word_limit <= 0:
        raise ValueError("word_limit must be positive")
    count = 0
    for start, end in sentence_spans(text, language):
        count += len(tokenize(text[start:end]))
        if count >= word_limit:
            return text[:end]
    return text


def truncate_article(article: Article, word_limit: int = WORD_LIMIT) -> Article:
    """Keep whole sentences until the running word count reaches ``word_limit``.

    The sentence in which the limit is reached is kept in full.
    """
    body = truncate_text(article.body, article.language, word_limit)
    return article if body == article.body else article.replace(body=body)


def read_region_table(path=None) -> dict[str, str]:
    """Country -> region mapping from a TSV file (the shipped table by default)."""
    if path is None:
        text = resources.files("polyframe.data").joinpath("regions.tsv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    table = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        country, region = line.split("\t")
        if country == "country":
            continue
        table[country.strip()] = region.strip()
    return table
