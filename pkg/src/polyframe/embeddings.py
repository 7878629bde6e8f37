"""Word-vector storage, cosine queries and a CBOW trainer with negative sampling."""
from __future__ import annotations

import dataclasses
import logging
import math
import random
from collections import Counter
from pathlib import Path
from typing import Iterable, Sequence

import numba
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_fraction, check_positive_int
from .corpus import tokenize

logger = logging.getLogger(__name__)

MAX_VOCAB = 50_000


class VectorFormatError(ValueError):
    pass


class VectorStore:
    """Immutable vocabulary of fixed-dimension word vectors."""

    def __init__(self, words: Sequence[str], vectors, language: str | None = None):
        matrix = np.array(vectors, dtype=np.float64, copy=True)
        if matrix.ndim != 2 or matrix.shape[0] != len(words):
            raise ValueError(f"expected {len(words)} vectors of equal dimension, got shape {matrix.shape}")
        index = {}
        for i, w in enumerate(words):
            if w in index:
                raise ValueError(f"duplicate word in vector store: {w!r}")
            index[w] = i
        matrix.setflags(write=False)
        self.words: tuple[str, ...] = tuple(words)
        self.matrix = matrix
        self.language = language
        self._index = index
        norms = np.linalg.norm(matrix, axis=1)
        norms.setflags(write=False)
        self._norms = norms

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return word in self._index

    def __getitem__(self, word: str) -> np.ndarray:
        return self.matrix[self._index[word]]

    def get(self, word: str, default=None):
        i = self._index.get(word)
        return default if i is None else self.matrix[i]

    def index(self, word: str) -> int:
        return self._index[word]

    def __repr__(self) -> str:
        return f"VectorStore(language={self.language!r}, size={len(self)}, dimension={self.dimension})"


def load_vectors(path, max_vocab: int = MAX_VOCAB, language: str | None = None) -> VectorStore:
    """Read the plain-text ``<count> <dim>`` vector format.

    Lines beyond ``max_vocab`` are dropped (file order is frequency order) with
    a warning. Duplicate words are rejected, keeping the first.
    """
    path = Path(path)
    words: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    rejected = 0
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise VectorFormatError(f"{path}: line 1: header must be '<count> <dimension>'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise VectorFormatError(f"{path}: line 1: header must hold two integers") from None
        if dim <= 0:
            raise VectorFormatError(f"{path}: line 1: dimension must be positive")
        truncated = False
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\n").rstrip(" ").split(" ")
            if not line.strip():
                continue
            if len(parts) != dim + 1:
                raise VectorFormatError(
                    f"{path}: line {lineno}: expected {dim} values, found {len(parts) - 1}")
            word = parts[0]
            if word in seen:
                rejected += 1
                continue
            if len(words) >= max_vocab:
                truncated = True
                break
            try:
                rows.append([float(x) for x in parts[1:]])
            except ValueError:
                raise VectorFormatError(f"{path}: line {lineno}: non-numeric vector value") from None
            seen.add(word)
            words.append(word)
    if truncated:
        logger.warning("%s: vocabulary capped at %d of %d entries", path, max_vocab, count)
    elif len(words) != count - rejected:
        logger.warning("%s: header declares %d entries, read %d", path, count, len(words))
    matrix = np.array(rows, dtype=np.float64).reshape(len(words), dim)
    return VectorStore(words, matrix, language=language)


def save_vectors(store: VectorStore, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(store)} {store.dimension}\n")
        for word, row in zip(store.words, store.matrix):
            fh.write(word + " " + " ".join(repr(float(x)) for x in row) + "\n")


def cosine(u, v) -> float:
    """Cosine similarity; NaN when either vector has zero norm."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = math.sqrt(float(u @ u))
    nv = math.sqrt(float(v @ v))
    if nu == 0.0 or nv == 0.0:
        return math.nan
    return max(-1.0, min(1.0, float(u @ v) / (nu * nv)))


def cosine_to_all(store: VectorStore, query) -> np.ndarray:
    """Cosine of ``query`` against every stored vector (NaN for zero rows)."""
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (store.dimension,):
        raise ValueError(f"query dimension {query.shape} does not match store dimension {store.dimension}")
    qn = np.linalg.norm(query)
    if len(store) == 0:
        return np.zeros(0)
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = store.matrix @ query / (store._norms * qn)
    return np.clip(sims, -1.0, 1.0)


def nearest_neighbors(store: VectorStore, query, k: int, min_sim: float,
                      exclude: Iterable[str] = ()) -> list[tuple[str, float]]:
    """Up to ``k`` words with cosine >= ``min_sim``, best first, ties by word.

    Entries whose vector is identical to ``query`` are never returned, so a
    word is not its own neighbour.
    """
    if len(store) == 0 or k <= 0:
        return []
    sims = cosine_to_all(store, query)
    query = np.asarray(query, dtype=np.float64)
    mask = np.isfinite(sims) & (sims >= min_sim)
    mask &= ~np.all(store.matrix == query, axis=1)
    for w in exclude:
        i = store._index.get(w)
        if i is not None:
            mask[i] = False
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    order = sorted(idx.tolist(), key=lambda i: (-sims[i], store.words[i]))[:k]
    return [(store.words[i], float(sims[i])) for i in order]


def sample_lines(path, n_lines: int = 1_000_000, seed: int = 0) -> list[str]:
    """Uniform single-pass reservoir sample of ``n_lines`` lines, in file order."""
    rng = random.Random(seed)
    reservoir: list[tuple[int, str]] = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.rstrip("\n")
            if i < n_lines:
                reservoir.append((i, line))
            else:
                j = rng.randrange(i + 1)
                if j < n_lines:
                    reservoir[j] = (i, line)
    reservoir.sort()
    return [line for _, line in reservoir]


# --- CBOW ------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class CbowConfig:
    dimension: int = 200
    window: int = 5
    min_count: int = 5
    max_vocab: int = MAX_VOCAB
    epochs: int = 5
    negative: int = 5
    alpha_start: float = 0.05
    alpha_end: float = 0.0001
    seed: int = 0

    def __post_init__(self):
        for name in ("dimension", "window", "min_count", "max_vocab", "epochs", "negative"):
            check_positive_int(getattr(self, name), name)
        if not self.alpha_start > self.alpha_end > 0:
            raise ValueError("learning rate schedule requires alpha_start > alpha_end > 0")


_TABLE_SIZE = 1_000_000
_MAX_EXP = 6.0


@numba.njit(cache=True)
def _next_random(state):
    # 48-bit LCG from the reference word2vec implementation.
    return (state * np.uint64(25214903917) + np.uint64(11)) & np.uint64(0xFFFFFFFFFFFF)


@numba.njit(cache=True)
def _sigmoid(x):
    if x > _MAX_EXP:
        x = _MAX_EXP
    elif x < -_MAX_EXP:
        x = -_MAX_EXP
    return 1.0 / (1.0 + math.exp(-x))


@numba.njit(cache=True)
def _train_span(syn0, syn1, tokens, offsets, s_begin, s_end, table, window, negative,
                alpha_start, alpha_end, total_words, words_done, state):
    dim = syn0.shape[1]
    neu1 = np.zeros(dim)
    neu1e = np.zeros(dim)
    loss = 0.0
    n_pred = 0
    done = words_done
    for s in range(s_begin, s_end):
        lo = offsets[s]
        hi = offsets[s + 1]
        for pos in range(lo, hi):
            progress = done / total_words
            if progress > 1.0:
                progress = 1.0
            alpha = alpha_start - (alpha_start - alpha_end) * progress
            done += 1
            state = _next_random(state)
            b = np.int64(state % np.uint64(window))
            span = window - b
            neu1[:] = 0.0
            cw = 0
            for c in range(pos - span, pos + span + 1):
                if c == pos or c < lo or c >= hi:
                    continue
                neu1 += syn0[tokens[c]]
                cw += 1
            if cw == 0:
                continue
            neu1 /= cw
            neu1e[:] = 0.0
            word = tokens[pos]
            for d in range(negative + 1):
                if d == 0:
                    target = word
                    label = 1.0
                else:
                    state = _next_random(state)
                    target = table[np.int64((state >> np.uint64(16)) % np.uint64(table.shape[0]))]
                    if target == word:
                        continue
                    label = 0.0
                f = 0.0
                for i in range(dim):
                    f += neu1[i] * syn1[target, i]
                p = _sigmoid(f)
                if label == 1.0:
                    loss -= math.log(max(p, 1e-12))
                else:
                    loss -= math.log(max(1.0 - p, 1e-12))
                g = (label - p) * alpha
                for i in range(dim):
                    neu1e[i] += g * syn1[target, i]
                    syn1[target, i] += g * neu1[i]
            n_pred += 1
            for c in range(pos - span, pos + span + 1):
                if c == pos or c < lo or c >= hi:
                    continue
                syn0[tokens[c]] += neu1e
    return loss, n_pred, state


@numba.njit(cache=True, parallel=True)
def _train_parallel(syn0, syn1, tokens, offsets, bounds, table, window, negative,
                    alpha_start, alpha_end, total_words, words_done, states):
    # Hogwild updates: chunks write shared matrices without locks.
    n_chunks = bounds.shape[0] - 1
    losses = np.zeros(n_chunks)
    preds = np.zeros(n_chunks, dtype=np.int64)
    for ch in numba.prange(n_chunks):
        start_words = words_done + offsets[bounds[ch]] - offsets[0]
        loss, n, st = _train_span(syn0, syn1, tokens, offsets, bounds[ch], bounds[ch + 1],
                                  table, window, negative, alpha_start, alpha_end,
                                  total_words, start_words, states[ch])
        losses[ch] = loss
        preds[ch] = n
        states[ch] = st
    return losses.sum(), preds.sum()


def build_vocabulary(sentences: Iterable[Sequence[str]], min_count: int, max_vocab: int):
    counts = Counter()
    for sent in sentences:
        counts.update(sent)
    kept = [(w, c) for w, c in counts.items() if c >= min_count]
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    return kept[:max_vocab]


def _unigram_table(freqs: np.ndarray, power: float = 0.75) -> np.ndarray:
    weights = freqs.astype(np.float64) ** power
    cdf = np.cumsum(weights) / weights.sum()
    points = (np.arange(_TABLE_SIZE) + 0.5) / _TABLE_SIZE
    return np.minimum(np.searchsorted(cdf, points), len(freqs) - 1).astype(np.int32)


class CBOWEmbedder(BaseEstimator):
    """Continuous bag-of-words word2vec with negative sampling.

    ``fit`` takes an iterable of text lines (one paragraph each). With
    ``workers=1`` training is bit-reproducible for a given seed; more workers
    train lock-free in parallel and are not reproducible.
    """

    def __init__(self, dimension=200, window=5, min_count=5, max_vocab=MAX_VOCAB, epochs=5,
                 negative=5, alpha_start=0.05, alpha_end=0.0001, seed=0, workers=1,
                 language=None):
        self.dimension = dimension
        self.window = window
        self.min_count = min_count
        self.max_vocab = max_vocab
        self.epochs = epochs
        self.negative = negative
        self.alpha_start = alpha_start
        self.alpha_end = alpha_end
        self.seed = seed
        self.workers = workers
        self.language = language

    @classmethod
    def from_config(cls, config: CbowConfig, **kwargs) -> "CBOWEmbedder":
        return cls(**dataclasses.asdict(config), **kwargs)

    def fit(self, lines: Iterable[str], y=None):
        config = CbowConfig(self.dimension, self.window, self.min_count, self.max_vocab,
                            self.epochs, self.negative, self.alpha_start, self.alpha_end, self.seed)
        check_positive_int(self.workers, "workers")
        sentences = [tokenize(line, self.language) for line in lines]
        vocab = build_vocabulary(sentences, config.min_count, config.max_vocab)
        if not vocab:
            raise ValueError("no trainable vocabulary")
        words = [w for w, _ in vocab]
        index = {w: i for i, w in enumerate(words)}
        encoded = []
        offsets = [0]
        for sent in sentences:
            ids = [index[t] for t in sent if t in index]
            if len(ids) < 2:
                continue
            encoded.extend(ids)
            offsets.append(len(encoded))
        tokens = np.asarray(encoded, dtype=np.int32)
        offsets_arr = np.asarray(offsets, dtype=np.int64)
        n_sent = len(offsets) - 1

        rng = np.random.default_rng(config.seed)
        dim = config.dimension
        syn0 = (rng.random((len(words), dim)) - 0.5) / dim
        syn1 = np.zeros((len(words), dim))
        table = _unigram_table(np.array([c for _, c in vocab]))
        total = float(max(1, len(tokens) * config.epochs))
        n_chunks = min(self.workers, max(1, n_sent))
        bounds = np.linspace(0, n_sent, n_chunks + 1).astype(np.int64)
        states = np.array([config.seed * 7919 + 1 + ch for ch in range(n_chunks)], dtype=np.uint64)

        history = []
        done = 0
        for _ in range(config.epochs):
            if n_sent == 0:
                history.append(0.0)
                continue
            if n_chunks == 1:
                loss, n_pred, st = _train_span(syn0, syn1, tokens, offsets_arr, 0, n_sent, table,
                                               config.window, config.negative, config.alpha_start,
                                               config.alpha_end, total, done, states[0])
                states[0] = st
            else:
                loss, n_pred = _train_parallel(syn0, syn1, tokens, offsets_arr, bounds, table,
                                               config.window, config.negative, config.alpha_start,
                                               config.alpha_end, total, done, states)
            done += len(tokens)
            history.append(loss / max(1, n_pred))
        if not np.all(np.isfinite(syn0)):
            raise FloatingPointError("CBOW training diverged (non-finite vectors)")
        self.vocabulary_ = words
        self.loss_history_ = history
        self.vectors_ = VectorStore(words, syn0, language=self.language)
        return self

    def transform(self, words: Iterable[str]) -> np.ndarray:
        check_is_fitted(self, "vectors_")
        return np.vstack([self.vectors_[w] for w in words])


def train_cbow(corpus_path, config: CbowConfig = CbowConfig(), workers: int = 1,
               language: str | None = None) -> VectorStore:
    """Train CBOW vectors on a one-paragraph-per-line corpus file."""
    with open(corpus_path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    model = CBOWEmbedder.from_config(config, workers=workers, language=language).fit(lines)
    logger.info("CBOW epoch losses: %s", ", ".join(f"{x:.4f}" for x in model.loss_history_))
    return model.vectors_
