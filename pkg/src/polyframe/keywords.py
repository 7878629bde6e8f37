"""Single-document statistical keyword extraction (YAKE-style) with edit-distance dedup."""
from __future__ import annotations

import dataclasses
import math
import statistics
from collections import Counter, defaultdict
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_fraction, check_positive_int
from .corpus import Article, sentence_spans, token_spans


@dataclasses.dataclass(frozen=True)
class KeywordConfig:
    num_keywords: int = 20
    max_ngram: int = 2
    dedup_threshold: float = 0.8
    window: int = 1

    def __post_init__(self):
        check_positive_int(self.num_keywords, "num_keywords")
        check_positive_int(self.max_ngram, "max_ngram")
        check_positive_int(self.window, "window")
        check_fraction(self.dedup_threshold, "dedup_threshold")
        if self.max_ngram > 3:
            raise ValueError("max_ngram must be between 1 and 3")


@dataclasses.dataclass(frozen=True)
class KeywordSet:
    article_id: str
    keywords: tuple[tuple[str, float], ...]

    @property
    def phrases(self) -> list[str]:
        return [p for p, _ in self.keywords]

    def __len__(self) -> int:
        return len(self.keywords)


@lru_cache(maxsize=None)
def _shipped_stopwords(language: str) -> frozenset[str]:
    f = resources.files("polyframe.data").joinpath(f"stopwords_{language}.txt")
    if not f.is_file():
        raise KeyError(f"no stopword list shipped for language {language!r}")
    return frozenset(w.strip().lower() for w in f.read_text(encoding="utf-8").splitlines() if w.strip())


def load_stopwords(language: str, directory=None) -> frozenset[str]:
    """Stopwords for ``language``: ``<directory>/<language>.txt`` or the shipped list."""
    if directory is not None:
        path = Path(directory) / f"{language}.txt"
        if path.is_file():
            return frozenset(w.strip().lower() for w in path.read_text(encoding="utf-8").splitlines()
                             if w.strip())
    return _shipped_stopwords(language)


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def edit_similarity(a: str, b: str) -> float:
    """1 - levenshtein(a, b) / max(len(a), len(b))."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def dedup_keywords(candidates: Sequence[tuple[str, float]], threshold: float) -> list[tuple[str, float]]:
    """Greedy pass keeping a candidate only if it is less similar than
    ``threshold`` to every phrase already kept."""
    kept: list[tuple[str, float]] = []
    for phrase, score in candidates:
        if all(edit_similarity(phrase, k) < threshold for k, _ in kept):
            kept.append((phrase, score))
    return kept


class _Term:
    __slots__ = ("tf", "tf_upper", "tf_acronym", "sentence_ids", "left", "right")

    def __init__(self):
        self.tf = 0
        self.tf_upper = 0
        self.tf_acronym = 0
        self.sentence_ids: list[int] = []
        self.left: Counter = Counter()
        self.right: Counter = Counter()


def _chunks(text: str, language: str):
    """Per sentence, runs of tokens separated by exactly one space."""
    for sid, (s, e) in enumerate(sentence_spans(text, language)):
        sentence = text[s:e]
        chunk: list[tuple[str, bool]] = []
        prev_end = None
        first = True
        for tok, ts, te in token_spans(sentence):
            if prev_end is not None and sentence[prev_end:ts] != " ":
                if chunk:
                    yield sid, chunk
                chunk = []
            chunk.append((tok, first))
            first = False
            prev_end = te
        if chunk:
            yield sid, chunk


def term_scores(text: str, language: str, stopwords: Iterable[str], window: int = 1):
    """Per-term statistical scores (lower means more important).

    Returns ``(scores, chunks)`` where ``scores`` maps lowercased non-stopword
    terms to their composite score and ``chunks`` lists ``(sentence_id, tokens)``.
    """
    stop = frozenset(stopwords)
    terms: dict[str, _Term] = defaultdict(_Term)
    chunks = []
    n_sentences = len(sentence_spans(text, language))
    for sid, chunk in _chunks(text, language):
        lowered = [tok.lower() for tok, _ in chunk]
        chunks.append((sid, lowered))
        for i, (tok, at_start) in enumerate(chunk):
            low = lowered[i]
            t = terms[low]
            t.tf += 1
            t.sentence_ids.append(sid)
            if len(tok) > 1 and tok.isupper():
                t.tf_acronym += 1
            elif tok[0].isupper() and not at_start:
                t.tf_upper += 1
            for j in range(max(0, i - window), i):
                t.left[lowered[j]] += 1
                terms[lowered[j]].right[low] += 1
    valid = {w: t for w, t in terms.items() if w not in stop and not w.isdigit()}
    if not valid:
        return {}, chunks
    tfs = [t.tf for t in valid.values()]
    mean_tf = statistics.fmean(tfs)
    std_tf = statistics.pstdev(tfs)
    max_tf = max(tfs)
    scores = {}
    for w, t in valid.items():
        case = max(t.tf_upper, t.tf_acronym) / (1.0 + math.log(t.tf))
        position = math.log(math.log(3.0 + statistics.median(t.sentence_ids)))
        fnorm = t.tf / (mean_tf + std_tf)
        wl = len(t.left) / sum(t.left.values()) if t.left else 0.0
        wr = len(t.right) / sum(t.right.values()) if t.right else 0.0
        rel = 1.0 + (wl + wr) * t.tf / max_tf
        spread = len(set(t.sentence_ids)) / n_sentences
        scores[w] = (rel * position) / (case + fnorm / rel + spread / rel)
    return scores, chunks


def extract_keywords(article: Article, config: KeywordConfig = KeywordConfig(),
                     stopwords: Iterable[str] = ()) -> KeywordSet:
    """Rank n-gram candidates of ``article`` by YAKE-style score (lower is better)."""
    if not article.body.strip():
        return KeywordSet(article.id, ())
    stop = frozenset(stopwords)
    scores, chunks = term_scores(article.body, article.language, stop, config.window)
    counts: Counter = Counter()
    for _, tokens in chunks:
        for n in range(1, config.max_ngram + 1):
            for i in range(len(tokens) - n + 1):
                gram = tokens[i:i + n]
                if all(t in scores and len(t) > 1 for t in gram):
                    counts[tuple(gram)] += 1
    ranked = []
    for gram, tf in counts.items():
        member = [scores[t] for t in gram]
        score = math.prod(member) / (tf * (1.0 + sum(member)))
        ranked.append((" ".join(gram), score))
    ranked.sort(key=lambda ps: (ps[1], ps[0]))
    kept = []
    for phrase, score in ranked:
        if len(kept) >= config.num_keywords:
            break
        if all(edit_similarity(phrase, k) < config.dedup_threshold for k, _ in kept):
            kept.append((phrase, score))
    return KeywordSet(article.id, tuple(kept))


class KeywordExtractor(BaseEstimator, TransformerMixin):
    """Stateless transformer from articles to :class:`KeywordSet` objects."""

    def __init__(self, num_keywords=20, max_ngram=2, dedup_threshold=0.8, window=1,
                 stopwords=None):
        self.num_keywords = num_keywords
        self.max_ngram = max_ngram
        self.dedup_threshold = dedup_threshold
        self.window = window
        self.stopwords = stopwords

    @property
    def config(self) -> KeywordConfig:
        return KeywordConfig(self.num_keywords, self.max_ngram, self.dedup_threshold, self.window)

    def fit(self, articles=None, y=None):
        self.config_ = self.config
        return self

    def _stopwords_for(self, language):
        if self.stopwords is None:
            return load_stopwords(language)
        if isinstance(self.stopwords, dict):
            return self.stopwords[language]
        return self.stopwords

    def transform(self, articles: Iterable[Article]) -> list[KeywordSet]:
        config = self.config
        return [extract_keywords(a, config, self._stopwords_for(a.language)) for a in articles]
