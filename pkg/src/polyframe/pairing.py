"""Cross-lingual article pairing by aligned keyword embeddings within a date window."""
from __future__ import annotations

import dataclasses
import itertools
import json
import logging
from collections import defaultdict
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive_int
from .corpus import Article, tokenize
from .embeddings import VectorStore
from .keywords import KeywordConfig, KeywordSet, extract_keywords, load_stopwords

logger = logging.getLogger(__name__)


class UnembeddableError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class PairingConfig:
    window_days: int = 28
    keyword_config: KeywordConfig = KeywordConfig()
    min_score: float = 0.55

    def __post_init__(self):
        check_positive_int(self.window_days, "window_days")


@dataclasses.dataclass(frozen=True)
class ArticlePair:
    source_id: str
    candidate_id: str
    score: float
    time_delta_days: int
    similarity_matrix: np.ndarray = dataclasses.field(repr=False, compare=False)

    def to_record(self) -> dict:
        return {"source_id": self.source_id, "candidate_id": self.candidate_id,
                "score": round(self.score, 6), "time_delta_days": self.time_delta_days}


def embed_phrase(phrase: str, store: VectorStore) -> np.ndarray | None:
    """Mean vector of the phrase's in-vocabulary words, or None."""
    vectors = [store[w] for w in tokenize(phrase) if w in store]
    if not vectors:
        return None
    return np.mean(vectors, axis=0)


def _embedded_unit_rows(ks: KeywordSet, store: VectorStore) -> np.ndarray:
    rows = []
    for phrase in ks.phrases:
        v = embed_phrase(phrase, store)
        if v is None:
            continue
        n = np.linalg.norm(v)
        if n > 0:
            rows.append(v / n)
    if not rows:
        return np.zeros((0, store.dimension))
    return np.vstack(rows)


def _matrix_score(matrix: np.ndarray) -> float:
    return 0.5 * (float(matrix.max(axis=1).mean()) + float(matrix.max(axis=0).mean()))


def _similarity(rows_a: np.ndarray, rows_b: np.ndarray):
    if len(rows_a) == 0 or len(rows_b) == 0:
        raise UnembeddableError("unembeddable keyword set")
    matrix = np.clip(rows_a @ rows_b.T, -1.0, 1.0)
    return _matrix_score(matrix), matrix


def keyword_similarity(ks_a: KeywordSet, ks_b: KeywordSet, store_a: VectorStore,
                       store_b: VectorStore) -> tuple[float, np.ndarray]:
    """Cosine matrix between embeddable keywords and its symmetric best-match score.

    ``score = (mean_i max_j M[i, j] + mean_j max_i M[i, j]) / 2``. Keywords with
    no in-vocabulary word are left out of the matrix.
    """
    return _similarity(_embedded_unit_rows(ks_a, store_a), _embedded_unit_rows(ks_b, store_b))


class ArticlePairer(BaseEstimator):
    """Index candidate articles once, then rank candidates for target articles."""

    def __init__(self, window_days=28, min_score=0.55, num_keywords=20, max_ngram=2,
                 dedup_threshold=0.8, window=1):
        self.window_days = window_days
        self.min_score = min_score
        self.num_keywords = num_keywords
        self.max_ngram = max_ngram
        self.dedup_threshold = dedup_threshold
        self.window = window

    @classmethod
    def from_config(cls, config: PairingConfig) -> "ArticlePairer":
        kc = config.keyword_config
        return cls(config.window_days, config.min_score, kc.num_keywords, kc.max_ngram,
                   kc.dedup_threshold, kc.window)

    @property
    def keyword_config(self) -> KeywordConfig:
        return KeywordConfig(self.num_keywords, self.max_ngram, self.dedup_threshold, self.window)

    def _rows(self, article: Article, stores, stopwords):
        sw = stopwords[article.language] if stopwords is not None else load_stopwords(article.language)
        ks = extract_keywords(article, self.keyword_config, sw)
        return _embedded_unit_rows(ks, stores[article.language])

    def fit(self, candidates: Iterable[Article], stores: Mapping[str, VectorStore],
            stopwords: Mapping[str, Iterable[str]] | None = None):
        check_positive_int(self.window_days, "window_days")
        self.candidates_ = list(candidates)
        self.stores_ = stores
        self.stopwords_ = stopwords
        self.rows_ = [self._rows(a, stores, stopwords) for a in self.candidates_]
        return self

    def pairs_for(self, target: Article, min_score: float | None = None) -> list[ArticlePair]:
        check_is_fitted(self, "rows_")
        threshold = self.min_score if min_score is None else min_score
        target_rows = self._rows(target, self.stores_, self.stopwords_)
        if len(target_rows) == 0:
            return []
        out = []
        for cand, rows in zip(self.candidates_, self.rows_):
            if cand.language == target.language or cand.id == target.id:
                continue
            delta = (cand.published_at - target.published_at).days
            if abs(delta) > self.window_days or len(rows) == 0:
                continue
            score, matrix = _similarity(target_rows, rows)
            if score < threshold:
                continue
            out.append(ArticlePair(target.id, cand.id, score, delta, matrix))
        out.sort(key=lambda p: (-p.score, p.candidate_id))
        return out

    def predict(self, targets: Iterable[Article]) -> list[ArticlePair | None]:
        """Top-1 pair per target (None when nothing passes the threshold)."""
        best = []
        for t in targets:
            pairs = self.pairs_for(t)
            best.append(pairs[0] if pairs else None)
        return best


def find_pairs(target: Article, candidates: Iterable[Article], config: PairingConfig,
               stores: Mapping[str, VectorStore],
               stopwords: Mapping[str, Iterable[str]] | None = None) -> list[ArticlePair]:
    """Candidates within the window, ranked by keyword similarity (best first)."""
    candidates = [c for c in candidates
                  if abs((c.published_at - target.published_at).days) <= config.window_days]
    if not candidates:
        return []
    return ArticlePairer.from_config(config).fit(candidates, stores, stopwords).pairs_for(target)


def gold_pairs(articles: Iterable[Article]) -> list[tuple[Article, Article]]:
    """Cross-language article pairs sharing a report id."""
    groups: dict[str, list[Article]] = defaultdict(list)
    for a in articles:
        if a.report_id is not None:
            groups[a.report_id].append(a)
    pairs = []
    for rid in sorted(groups):
        members = sorted(groups[rid], key=lambda a: a.id)
        for a, b in itertools.combinations(members, 2):
            if a.language != b.language:
                pairs.append((a, b))
    return pairs


def score_gold_pairs(gold: Sequence[tuple[Article, Article]], config: KeywordConfig,
                     stores: Mapping[str, VectorStore],
                     stopwords: Mapping[str, Iterable[str]] | None = None) -> list[float | None]:
    """Keyword similarity of each gold pair under ``config`` (None if unembeddable)."""
    def sw(lang):
        return stopwords[lang] if stopwords is not None else load_stopwords(lang)

    cache: dict[str, KeywordSet] = {}

    def kws(a):
        if a.id not in cache:
            cache[a.id] = extract_keywords(a, config, sw(a.language))
        return cache[a.id]

    scores = []
    for a, b in gold:
        try:
            s, _ = keyword_similarity(kws(a), kws(b), stores[a.language], stores[b.language])
        except UnembeddableError:
            s = None
        scores.append(s)
    return scores


GRID_AXES = ("num_keywords", "max_ngram", "dedup_threshold")


def tune_hyperparameters(gold: Sequence[tuple[Article, Article]], grid: Mapping[str, Sequence],
                         stores: Mapping[str, VectorStore],
                         stopwords: Mapping[str, Iterable[str]] | None = None,
                         window: int = 1):
    """Exhaustive grid search maximizing mean gold-pair keyword similarity.

    Unembeddable gold pairs contribute 0. Ties prefer fewer keywords, then a
    smaller n-gram size, then a lower dedup threshold. Returns the best
    :class:`KeywordConfig` and one row per configuration.
    """
    if not gold:
        raise ValueError("empty gold pair set")
    unknown = set(grid) - set(GRID_AXES)
    if unknown:
        raise ValueError(f"unknown grid axes: {sorted(unknown)}")
    axes = [sorted(set(grid.get(axis, [getattr(KeywordConfig(), axis)]))) for axis in GRID_AXES]
    table = []
    for nk, ng, dd in itertools.product(*axes):
        config = KeywordConfig(num_keywords=int(nk), max_ngram=int(ng), dedup_threshold=float(dd),
                               window=window)
        scores = score_gold_pairs(gold, config, stores, stopwords)
        valid = [s for s in scores if s is not None]
        mean = sum(s if s is not None else 0.0 for s in scores) / len(scores)
        table.append({"num_keywords": config.num_keywords, "max_ngram": config.max_ngram,
                      "dedup_threshold": config.dedup_threshold, "mean_score": mean,
                      "scored_pairs": len(valid), "gold_pairs": len(scores)})
    best = min(table, key=lambda r: (-r["mean_score"], r["num_keywords"], r["max_ngram"],
                                     r["dedup_threshold"]))
    config = KeywordConfig(best["num_keywords"], best["max_ngram"], best["dedup_threshold"], window)
    return config, table


def calibrate_min_score(gold_scores: Iterable[float | None], coverage: float = 0.9) -> float:
    """Largest threshold that at least ``coverage`` of the gold scores reach."""
    scores = sorted(s for s in gold_scores if s is not None)
    if not scores:
        raise ValueError("no scored gold pairs to calibrate on")
    # ceil without float surprises: at least `coverage` of pairs must reach the threshold.
    keep = -(-int(round(coverage * 1e9)) * len(scores) // int(1e9))
    return scores[len(scores) - max(1, keep)]


def write_pairs(pairs: Iterable[ArticlePair], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pairs:
            fh.write(json.dumps(p.to_record()) + "\n")


def read_pairs(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
