"""Inter-method agreement: raw agreement, nominal Krippendorff's alpha and MACE."""
from __future__ import annotations

import csv
import dataclasses
from typing import Hashable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_positive_int
from .frames import FRAMES, Frame
from .scoring import PresenceVector

MISSING = -1


@dataclasses.dataclass(frozen=True)
class AnnotationMatrix:
    """Items x annotators label matrix; ``codes`` holds label-space indices, -1 = missing."""

    items: tuple
    annotators: tuple
    label_space: tuple
    codes: np.ndarray = dataclasses.field(repr=False)

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        if codes.shape != (len(self.items), len(self.annotators)):
            raise ValueError(f"codes shape {codes.shape} does not match items x annotators")
        if codes.size and (codes.min() < MISSING or codes.max() >= len(self.label_space)):
            raise ValueError("label code outside the label space")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    @classmethod
    def from_labels(cls, items: Sequence, annotators: Sequence,
                    labels: Mapping[tuple[Hashable, Hashable], Hashable],
                    label_space: Sequence | None = None) -> "AnnotationMatrix":
        """Build from a partial ``(item, annotator) -> label`` mapping."""
        if label_space is None:
            label_space = sorted({v for v in labels.values()}, key=repr)
        index = {lab: k for k, lab in enumerate(label_space)}
        item_pos = {it: i for i, it in enumerate(items)}
        ann_pos = {a: j for j, a in enumerate(annotators)}
        codes = np.full((len(items), len(annotators)), MISSING, dtype=np.int64)
        for (it, ann), lab in labels.items():
            if lab is None:
                continue
            if lab not in index:
                raise ValueError(f"label {lab!r} not in label space")
            codes[item_pos[it], ann_pos[ann]] = index[lab]
        return cls(tuple(items), tuple(annotators), tuple(label_space), codes)

    def label(self, i: int, j: int):
        c = self.codes[i, j]
        return None if c == MISSING else self.label_space[c]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["item", *self.annotators])
            for i, item in enumerate(self.items):
                row = [self.label(i, j) for j in range(len(self.annotators))]
                w.writerow([_item_str(item), *["" if v is None else v for v in row]])

    @classmethod
    def read_csv(cls, path) -> "AnnotationMatrix":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            items, labels = [], {}
            for row in reader:
                items.append(row[0])
                for ann, v in zip(header[1:], row[1:]):
                    if v != "":
                        labels[(row[0], ann)] = v
        return cls.from_labels(items, header[1:], labels)


def _item_str(item) -> str:
    if isinstance(item, tuple):
        return ":".join(str(x) for x in item)
    return str(item)


def raw_agreement(a: Mapping, b: Mapping) -> float:
    """Percentage of shared items where both maps hold the same label."""
    shared = a.keys() & b.keys()
    if not shared:
        raise ValueError("raw agreement needs at least one shared item")
    same = sum(1 for k in shared if a[k] == b[k])
    return 100.0 * same / len(shared)


def coincidence_matrix(matrix: AnnotationMatrix) -> np.ndarray:
    k = len(matrix.label_space)
    o = np.zeros((k, k))
    for row in matrix.codes:
        values = row[row != MISSING]
        m = len(values)
        if m < 2:
            continue
        counts = np.bincount(values, minlength=k).astype(float)
        # Ordered pairs of distinct coders within the unit, weighted 1/(m-1).
        o += (np.outer(counts, counts) - np.diag(counts)) / (m - 1)
    return o


def krippendorff_alpha(matrix: AnnotationMatrix, metric: str = "nominal") -> float:
    """Nominal Krippendorff's alpha from the coincidence matrix; tolerates missing labels."""
    if metric != "nominal":
        raise ValueError("only the nominal metric is supported")
    o = coincidence_matrix(matrix)
    n_c = o.sum(axis=1)
    n = n_c.sum()
    pairable_units = int(np.sum((matrix.codes != MISSING).sum(axis=1) >= 2))
    if pairable_units < 2:
        raise ValueError("alpha needs at least two items with two or more labels")
    observed = o.sum() - np.trace(o)
    expected = (n * n - np.sum(n_c ** 2)) / (n - 1)
    if expected == 0:
        raise ValueError("degenerate label distribution: zero expected disagreement")
    return 1.0 - observed / expected


@dataclasses.dataclass(frozen=True)
class PriorSpec:
    mode: str = "none"
    distribution: Mapping[Frame, float] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("none", "unfiltered", "filtered"):
            raise ValueError(f"unknown prior mode {self.mode!r}")
        if self.mode != "none":
            total = sum(self.distribution.values())
            if abs(total - 1.0) > 1e-9 or any(p < 0 for p in self.distribution.values()):
                raise ValueError("prior probabilities must be non-negative and sum to 1")


def label_priors_for(matrix: AnnotationMatrix, priors: PriorSpec | None) -> np.ndarray | None:
    """Translate a frame prior into MACE label priors for ``matrix``.

    Frame-labelled matrices get the distribution over their label space.
    Presence matrices (labels 0/1, items ``(article_id, frame_code)``) get a
    per-item prior ``[1 - p(F), p(F)]``.
    """
    if priors is None or priors.mode == "none":
        return None
    dist = {f: priors.distribution.get(f, 0.0) for f in FRAMES}
    if all(isinstance(lab, Frame) for lab in matrix.label_space):
        p = np.array([dist[lab] for lab in matrix.label_space], dtype=float)
        if p.sum() <= 0:
            raise ValueError("prior assigns zero mass to the whole label space")
        return p / p.sum()
    if tuple(matrix.label_space) == (0, 1):
        rows = []
        for item in matrix.items:
            p = dist[Frame.from_code(item[1])]
            rows.append([1.0 - p, p])
        return np.array(rows, dtype=float).reshape(len(matrix.items), 2)
    raise ValueError("priors apply to frame-labelled or presence matrices only")


@dataclasses.dataclass(frozen=True)
class CompetenceResult:
    competence: dict
    strategy: dict
    posteriors: dict
    log_likelihood: list[float]

    def as_percent(self) -> dict:
        return {a: round(100.0 * t, 1) for a, t in self.competence.items()}


def _logsumexp(x: np.ndarray) -> np.ndarray:
    m = np.max(x, axis=1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return (m + np.log(np.sum(np.exp(x - m), axis=1, keepdims=True)))[:, 0]


class MACE(BaseEstimator):
    """Multi-Annotator Competence Estimation fitted by EM.

    Each annotator copies the true label with probability ``theta`` and
    otherwise draws from its own strategy distribution. Additive
    ``smoothing`` makes every M-step a MAP update, so the traced objective
    (log-likelihood plus the smoothing prior) never decreases within a run.
    ``label_priors`` is a length-K vector or an (n_items, K) array.
    """

    def __init__(self, n_restarts=10, n_iter=50, smoothing=None, label_priors=None, seed=0):
        self.n_restarts = n_restarts
        self.n_iter = n_iter
        self.smoothing = smoothing
        self.label_priors = label_priors
        self.seed = seed

    def _objective(self, log_q, theta, xi, s):
        ll = float(np.sum(_logsumexp(log_q)))
        if s > 0:
            with np.errstate(divide="ignore"):
                ll += s * float(np.sum(np.log(theta)) + np.sum(np.log1p(-theta)) + np.sum(np.log(xi)))
        return ll

    def _e_step(self, codes_i, codes_j, codes_a, n_items, log_prior, theta, xi):
        k = xi.shape[1]
        like = (1.0 - theta[codes_j])[:, None] * xi[codes_j, codes_a][:, None] * np.ones((1, k))
        like[np.arange(len(codes_a)), codes_a] += theta[codes_j]
        with np.errstate(divide="ignore"):
            log_like = np.log(like)
        log_q = np.broadcast_to(log_prior, (n_items, k)).copy()
        np.add.at(log_q, codes_i, log_like)
        return log_q, like

    def _run(self, codes_i, codes_j, codes_a, n_items, n_ann, k, log_prior, s, rng):
        theta = rng.uniform(0.0, 1.0, size=n_ann)
        xi = rng.uniform(0.0, 1.0, size=(n_ann, k))
        xi /= xi.sum(axis=1, keepdims=True)
        trace = []
        for _ in range(self.n_iter):
            log_q, like = self._e_step(codes_i, codes_j, codes_a, n_items, log_prior, theta, xi)
            trace.append(self._objective(log_q, theta, xi, s))
            post = np.exp(log_q - _logsumexp(log_q)[:, None])
            copy_lik = theta[codes_j]
            p_true = post[codes_i, codes_a]
            copy = p_true * copy_lik / like[np.arange(len(codes_a)), codes_a]
            spam = 1.0 - copy
            copy_sum = np.bincount(codes_j, weights=copy, minlength=n_ann)
            n_j = np.bincount(codes_j, minlength=n_ann).astype(float)
            theta = (copy_sum + s) / (n_j + 2 * s)
            spam_counts = np.zeros((n_ann, k))
            np.add.at(spam_counts, (codes_j, codes_a), spam)
            denom = spam_counts.sum(axis=1, keepdims=True) + k * s
            xi = np.where(denom > 0, (spam_counts + s) / np.where(denom > 0, denom, 1.0), 1.0 / k)
            theta = np.clip(theta, 0.0, 1.0)
        log_q, _ = self._e_step(codes_i, codes_j, codes_a, n_items, log_prior, theta, xi)
        trace.append(self._objective(log_q, theta, xi, s))
        post = np.exp(log_q - _logsumexp(log_q)[:, None])
        return theta, xi, post, trace

    def fit(self, matrix: AnnotationMatrix, y=None):
        check_positive_int(self.n_restarts, "n_restarts")
        check_positive_int(self.n_iter, "n_iter")
        codes = matrix.codes
        if codes.size == 0:
            raise ValueError("MACE needs a non-empty annotation matrix")
        n_items, n_ann = codes.shape
        k = len(matrix.label_space)
        s = (0.01 / k) if self.smoothing is None else float(self.smoothing)
        if s < 0:
            raise ValueError("smoothing must be non-negative")
        codes_i, codes_j = np.nonzero(codes != MISSING)
        codes_a = codes[codes_i, codes_j]
        if self.label_priors is None:
            prior = np.full((1, k), 1.0 / k)
        else:
            prior = np.asarray(self.label_priors, dtype=float)
            prior = prior.reshape(1, k) if prior.ndim == 1 else prior
            if prior.shape not in ((1, k), (n_items, k)):
                raise ValueError(f"label_priors shape {prior.shape} incompatible with matrix")
        with np.errstate(divide="ignore"):
            log_prior = np.log(prior / prior.sum(axis=1, keepdims=True))
        rng = np.random.default_rng(self.seed)
        best = None
        objectives = []
        for _ in range(self.n_restarts):
            run = self._run(codes_i, codes_j, codes_a, n_items, n_ann, k, log_prior, s, rng)
            objectives.append(run[3][-1])
            if best is None or run[3][-1] > best[3][-1]:
                best = run
        self.competence_, self.strategy_, self.posteriors_, self.log_likelihood_ = best
        self.restart_objectives_ = objectives
        self.matrix_ = matrix
        return self

    def predict(self, matrix: AnnotationMatrix | None = None):
        """Posterior-argmax label per item of the fitted matrix."""
        check_is_fitted(self, "posteriors_")
        space = self.matrix_.label_space
        return [space[k] for k in np.argmax(self.posteriors_, axis=1)]

    def result(self) -> CompetenceResult:
        check_is_fitted(self, "posteriors_")
        m = self.matrix_
        return CompetenceResult(
            competence={a: float(t) for a, t in zip(m.annotators, self.competence_)},
            strategy={a: dict(zip(m.label_space, map(float, row)))
                      for a, row in zip(m.annotators, self.strategy_)},
            posteriors={it: dict(zip(m.label_space, map(float, row)))
                        for it, row in zip(m.items, self.posteriors_)},
            log_likelihood=list(self.log_likelihood_),
        )


def mace(matrix: AnnotationMatrix, priors: PriorSpec | None = None, restarts: int = 10,
         iterations: int = 50, smoothing: float | None = None, seed: int = 0) -> CompetenceResult:
    """Fit MACE and return competences, strategies, posteriors and the objective trace."""
    model = MACE(restarts, iterations, smoothing, label_priors_for(matrix, priors), seed)
    return model.fit(matrix).result()


PRESENTATIONS = ("binary", "positive")


def build_presentation(lexicon: Sequence[PresenceVector], sentence: Sequence[PresenceVector],
                       mode: str = "binary") -> AnnotationMatrix:
    """Presence decisions of the two methods as an items x methods 0/1 matrix.

    Items are ``(article_id, frame_code)``. ``positive`` keeps only items that
    at least one method marks present.
    """
    if mode not in PRESENTATIONS:
        raise ValueError(f"unknown presentation {mode!r}")
    lb = {p.article_id: p for p in lexicon}
    tb = {p.article_id: p for p in sentence}
    uncovered = sorted(lb.keys() ^ tb.keys())
    if uncovered:
        raise ValueError(f"methods cover different articles: {uncovered[:10]}")
    items, rows = [], []
    for aid in sorted(lb):
        for f in FRAMES:
            a, b = lb[aid][f], tb[aid][f]
            if mode == "positive" and not (a or b):
                continue
            items.append((aid, f.code))
            rows.append([int(a), int(b)])
    codes = np.array(rows, dtype=np.int64).reshape(len(items), 2)
    return AnnotationMatrix(tuple(items), ("lexicon", "sentence"), (0, 1), codes)


def dominant_matrix(lexicon: Mapping[str, Frame | None], sentence: Mapping[str, Frame | None]
                    ) -> AnnotationMatrix:
    """Dominant-frame decisions as an articles x methods matrix (None = missing)."""
    items = sorted(lexicon.keys() | sentence.keys())
    labels = {}
    for aid in items:
        if lexicon.get(aid) is not None:
            labels[(aid, "lexicon")] = lexicon[aid]
        if sentence.get(aid) is not None:
            labels[(aid, "sentence")] = sentence[aid]
    return AnnotationMatrix.from_labels(items, ("lexicon", "sentence"), labels, FRAMES)
