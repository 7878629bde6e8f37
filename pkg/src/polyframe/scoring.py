"""Frame votes per article from lexicon hits or externally predicted sentence labels."""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import random
import zlib
from collections import Counter, defaultdict
from typing import Iterable, Mapping, NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_same_language
from .corpus import Article, sentence_spans, tokenize
from .frames import FRAMES, N_FRAMES, Frame
from .lexicon import FrameLexicon

logger = logging.getLogger(__name__)

METHODS = ("lexicon", "sentence")
LEXICON_HITS_PER_VOTE = 3


def _votes_from_raw(method: str, raw: tuple[int, ...]) -> tuple[int, ...]:
    if method == "lexicon":
        return tuple(r // LEXICON_HITS_PER_VOTE for r in raw)
    return tuple(raw)


@dataclasses.dataclass(frozen=True)
class FrameVoteVector:
    """Raw evidence and votes over the 14 frames, indexed by ``Frame.code - 1``."""

    article_id: str
    method: str
    raw: tuple[int, ...]

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown scoring method {self.method!r}")
        if len(self.raw) != N_FRAMES or any(r < 0 for r in self.raw):
            raise ValueError("raw counts must be 14 non-negative integers")

    @classmethod
    def from_counts(cls, article_id: str, method: str, counts: Mapping[Frame, int]) -> "FrameVoteVector":
        return cls(article_id, method, tuple(int(counts.get(f, 0)) for f in FRAMES))

    @property
    def votes(self) -> tuple[int, ...]:
        return _votes_from_raw(self.method, self.raw)

    def vote(self, frame: Frame) -> int:
        return self.votes[frame.code - 1]

    def raw_count(self, frame: Frame) -> int:
        return self.raw[frame.code - 1]


@dataclasses.dataclass(frozen=True)
class PresenceVector:
    article_id: str
    method: str
    presence: tuple[bool, ...]

    def __post_init__(self):
        if len(self.presence) != N_FRAMES:
            raise ValueError("presence must have 14 entries")

    def __getitem__(self, frame: Frame) -> bool:
        return self.presence[frame.code - 1]

    @property
    def present_frames(self) -> list[Frame]:
        return [f for f, p in zip(FRAMES, self.presence) if p]


def score_lexicon(article: Article, lexicons: Mapping[Frame, FrameLexicon]) -> FrameVoteVector:
    """Count token occurrences of each frame's lexicon words (overlaps count for every frame)."""
    for lex in lexicons.values():
        check_same_language(lex.language, article.language)
    tokens = Counter(tokenize(article.body, article.language))
    counts = {}
    for frame, lex in lexicons.items():
        counts[frame] = sum(tokens.get(w, 0) for w in set(lex.words))
    return FrameVoteVector.from_counts(article.id, "lexicon", counts)


class LabelIngest(NamedTuple):
    vectors: list[FrameVoteVector]
    unknown_article: int
    unknown_frame: int
    out_of_range: int


def ingest_sentence_labels(path, articles: Iterable[Article]) -> LabelIngest:
    """Sentence-level frame predictions to per-article vote vectors.

    Rows are JSON objects with ``article_id``, ``sentence_index``,
    ``frame_code`` and an optional ``confidence``. Indices refer to the
    sentences of the article bodies passed in. Repeated ``(sentence, frame)``
    rows count once.
    """
    by_id = {a.id: a for a in articles}
    n_sentences: dict[str, int] = {}
    labels: dict[str, set[tuple[int, Frame]]] = defaultdict(set)
    unknown_article = unknown_frame = out_of_range = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                aid = str(row["article_id"])
                index = int(row["sentence_index"])
                code = row["frame_code"]
            except (ValueError, KeyError, TypeError):
                unknown_frame += 1
                logger.warning("%s:%d: malformed label row", path, lineno)
                continue
            if aid not in by_id:
                unknown_article += 1
                logger.warning("%s:%d: unknown article %r", path, lineno, aid)
                continue
            try:
                frame = Frame.from_code(code)
            except ValueError:
                unknown_frame += 1
                logger.warning("%s:%d: frame code %r outside the taxonomy", path, lineno, code)
                continue
            if aid not in n_sentences:
                a = by_id[aid]
                n_sentences[aid] = len(sentence_spans(a.body, a.language))
            if not 0 <= index < n_sentences[aid]:
                out_of_range += 1
                logger.warning("%s:%d: sentence index %d out of range for %r", path, lineno, index, aid)
                continue
            labels[aid].add((index, frame))
    vectors = []
    for aid in by_id:
        if aid not in n_sentences:
            continue
        counts = Counter(frame for _, frame in labels[aid])
        vectors.append(FrameVoteVector.from_counts(aid, "sentence", counts))
    return LabelIngest(vectors, unknown_article, unknown_frame, out_of_range)


def article_seed(seed: int, article_id: str) -> int:
    """Stable per-article seed derived from a run seed."""
    return (seed * 1_000_003 + zlib.crc32(article_id.encode("utf-8"))) & 0xFFFFFFFF


def dominant_frame(votes: FrameVoteVector, seed: int) -> Frame | None:
    """Frame with the highest raw count, ties broken uniformly at random."""
    best = max(votes.raw)
    if best == 0:
        return None
    tied = [f for f, r in zip(FRAMES, votes.raw) if r == best]
    if len(tied) == 1:
        return tied[0]
    return random.Random(seed).choice(tied)


def presence_vector(votes: FrameVoteVector) -> PresenceVector:
    return PresenceVector(votes.article_id, votes.method, tuple(v >= 1 for v in votes.votes))


class LexiconScorer(BaseEstimator, TransformerMixin):
    """Transform articles into raw lexicon-hit counts (n_articles x 14)."""

    def __init__(self, lexicons=None):
        self.lexicons = lexicons

    def fit(self, articles=None, y=None):
        if not self.lexicons:
            raise ValueError("LexiconScorer needs per-frame lexicons")
        languages = {lex.language for lex in self.lexicons.values()}
        if len(languages) != 1:
            raise ValueError(f"lexicons span several languages: {sorted(languages)}")
        self.language_ = languages.pop()
        return self

    def score(self, articles: Iterable[Article]) -> list[FrameVoteVector]:
        check_is_fitted(self, "language_")
        return [score_lexicon(a, self.lexicons) for a in articles]

    def transform(self, articles: Iterable[Article]) -> np.ndarray:
        vectors = self.score(articles)
        return np.array([v.raw for v in vectors], dtype=np.int64).reshape(len(vectors), N_FRAMES)


FRAME_COLUMNS = [f.label for f in FRAMES]


def write_vectors_csv(vectors: Iterable, path, what: str = "votes") -> None:
    """One row per article with 14 frame columns of ``raw``, ``votes`` or ``presence``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["article_id", "method", *FRAME_COLUMNS])
        for v in vectors:
            if what == "presence":
                values = [int(p) for p in v.presence]
            else:
                values = list(getattr(v, what))
            w.writerow([v.article_id, v.method, *values])


def read_raw_csv(path) -> list[FrameVoteVector]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[2:] != FRAME_COLUMNS:
            raise ValueError(f"{path}: unexpected frame columns")
        return [FrameVoteVector(row[0], row[1], tuple(int(x) for x in row[2:])) for row in reader]
