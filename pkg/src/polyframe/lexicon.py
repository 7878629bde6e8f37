"""Frame lexicon induction: PMI base lexicons, df filtering, translation and
embedding-neighbourhood contextualization."""
from __future__ import annotations

import dataclasses
import json
import logging
import math
from collections import Counter, defaultdict
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_fraction, check_positive_int
from .corpus import AnnotatedSpan, tokenize
from .embeddings import VectorStore, nearest_neighbors
from .frames import FRAMES, Frame

logger = logging.getLogger(__name__)

BASE_SIZE = 250
NEIGHBORS = 500
MIN_SIM = 0.5
CAP = 300
DF_HI = 0.98
DF_LO = 0.005

STAGES = ("base", "translated", "contextualized")


class LexiconError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class FrameLexicon:
    frame: Frame
    language: str
    entries: tuple[tuple[str, float], ...]
    stage: str = "base"
    dropped: int = 0

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ValueError(f"unknown lexicon stage {self.stage!r}")

    @property
    def words(self) -> list[str]:
        return [w for w, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word) -> bool:
        return any(w == word for w, _ in self.entries)


@dataclasses.dataclass
class FrameCounts:
    """Token statistics behind the PMI ranking.

    The corpus is the union of all annotated spans; each span adds its tokens
    to the corpus and to its frame.
    """

    frame_freqs: dict[Frame, Counter]
    frame_totals: dict[Frame, int]
    corpus_freqs: Counter
    corpus_total: int
    doc_counts: Counter
    n_docs: int

    @classmethod
    def from_spans(cls, spans: Iterable[AnnotatedSpan], language: str = "en") -> "FrameCounts":
        frame_freqs: dict[Frame, Counter] = defaultdict(Counter)
        corpus = Counter()
        docs: dict[str, set[str]] = defaultdict(set)
        for span in spans:
            tokens = tokenize(span.sentence, language)
            frame_freqs[span.frame].update(tokens)
            corpus.update(tokens)
            docs[span.doc_id].update(tokens)
        doc_counts = Counter()
        for vocab in docs.values():
            doc_counts.update(vocab)
        return cls(
            frame_freqs=dict(frame_freqs),
            frame_totals={f: sum(c.values()) for f, c in frame_freqs.items()},
            corpus_freqs=corpus,
            corpus_total=sum(corpus.values()),
            doc_counts=doc_counts,
            n_docs=len(docs),
        )

    def doc_freqs(self) -> dict[str, float]:
        return {w: c / self.n_docs for w, c in self.doc_counts.items()} if self.n_docs else {}


def term_document_frequencies(documents: Iterable[Iterable[str]]) -> dict[str, float]:
    """Fraction of documents (token iterables) containing each word."""
    counts = Counter()
    n = 0
    for doc in documents:
        counts.update(set(doc))
        n += 1
    return {w: c / n for w, c in counts.items()} if n else {}


def pmi(word: str, frame: Frame, counts: FrameCounts) -> float:
    """``ln(P(w|F) / P(w))``; ``-inf`` when the word never occurs in the frame."""
    corpus_freq = counts.corpus_freqs.get(word, 0)
    if corpus_freq == 0:
        raise KeyError(f"unknown word: {word!r}")
    total = counts.frame_totals.get(frame, 0)
    if total == 0:
        raise LexiconError(f"frame {frame} has no tokens")
    in_frame = counts.frame_freqs[frame].get(word, 0)
    if in_frame == 0:
        return -math.inf
    return math.log((in_frame / total) / (corpus_freq / counts.corpus_total))


def pmi_joint(word: str, frame: Frame, counts: FrameCounts) -> float:
    """The same association written as ``ln(P(F, w) / (P(F) P(w)))``.

    ``P(F)`` is the frame's share of corpus tokens.
    """
    n = counts.corpus_total
    p_fw = counts.frame_freqs.get(frame, Counter()).get(word, 0) / n
    p_f = counts.frame_totals.get(frame, 0) / n
    p_w = counts.corpus_freqs.get(word, 0) / n
    if p_w == 0:
        raise KeyError(f"unknown word: {word!r}")
    if p_f == 0:
        raise LexiconError(f"frame {frame} has no tokens")
    if p_fw == 0:
        return -math.inf
    return math.log(p_fw / (p_f * p_w))


def df_filter(lexicon: FrameLexicon, doc_freqs: Mapping[str, float], hi: float = DF_HI,
              lo: float = DF_LO) -> FrameLexicon:
    """Keep entries whose document frequency lies in ``[lo, hi]`` (missing counts as 0)."""
    kept = tuple((w, s) for w, s in lexicon.entries if lo <= doc_freqs.get(w, 0.0) <= hi)
    return dataclasses.replace(lexicon, entries=kept)


def build_base_lexicon(spans: Iterable[AnnotatedSpan], frame: Frame, size: int = BASE_SIZE,
                       doc_freqs: Mapping[str, float] | None = None, hi: float = DF_HI,
                       lo: float = DF_LO, counts: FrameCounts | None = None,
                       language: str = "en") -> FrameLexicon:
    """Top-``size`` frame words by PMI after document-frequency filtering.

    Document frequencies default to the share of annotated documents (span
    ``doc_id``) containing the word. Ties rank alphabetically.
    """
    if counts is None:
        counts = FrameCounts.from_spans(spans, language)
    if counts.frame_totals.get(frame, 0) == 0:
        raise LexiconError(f"no annotated spans for frame {frame}")
    if doc_freqs is None:
        doc_freqs = counts.doc_freqs()
    scored = [(w, pmi(w, frame, counts)) for w in counts.frame_freqs[frame]]
    scored.sort(key=lambda ws: (-ws[1], ws[0]))
    lexicon = FrameLexicon(frame, language, tuple(scored), "base")
    lexicon = df_filter(lexicon, doc_freqs, hi, lo)
    return dataclasses.replace(lexicon, entries=lexicon.entries[:size])


def translate_lexicon(lexicon: FrameLexicon, table: Mapping[str, str],
                      language: str) -> FrameLexicon:
    """Substitute each word by its translation.

    Words without a single-token translation are dropped and counted in
    ``dropped``; collisions keep the earliest-ranked entry.
    """
    entries = []
    seen = set()
    dropped = 0
    for word, score in lexicon.entries:
        target = table.get(word)
        tokens = tokenize(target, language) if target else []
        if len(tokens) != 1:
            dropped += 1
            continue
        if tokens[0] in seen:
            continue
        seen.add(tokens[0])
        entries.append((tokens[0], score))
    if not entries:
        raise LexiconError(f"translation produced empty lexicon for frame {lexicon.frame}")
    if dropped:
        logger.info("frame %s -> %s: %d untranslated word(s) dropped", lexicon.frame, language, dropped)
    return FrameLexicon(lexicon.frame, language, tuple(entries), "translated", dropped)


def lexicon_center(lexicon: FrameLexicon, store: VectorStore) -> np.ndarray:
    vectors = [store[w] for w in lexicon.words if w in store]
    if not vectors:
        raise LexiconError(f"center undefined: no word of frame {lexicon.frame} is in the vocabulary")
    return np.sum(vectors, axis=0)


def contextualize(lexicon: FrameLexicon, store: VectorStore, k: int = NEIGHBORS,
                  min_sim: float = MIN_SIM, cap: int = CAP,
                  doc_freqs: Mapping[str, float] | None = None, hi: float = DF_HI,
                  lo: float = DF_LO) -> FrameLexicon:
    """Replace a translated lexicon by the nearest neighbours of its summed vector.

    The translated words themselves are excluded. With ``doc_freqs`` the
    neighbours are df-filtered before keeping the ``cap`` most similar.
    """
    center = lexicon_center(lexicon, store)
    neighbors = nearest_neighbors(store, center, k, min_sim, exclude=lexicon.words)
    result = FrameLexicon(lexicon.frame, lexicon.language, tuple(neighbors), "contextualized")
    if doc_freqs is not None:
        result = df_filter(result, doc_freqs, hi, lo)
    return dataclasses.replace(result, entries=result.entries[:cap])


class LexiconInducer(BaseEstimator):
    """Fit English base lexicons on annotated spans, then localize them.

    ``fit`` builds one base lexicon per frame with annotations;
    ``localize`` translates and contextualizes them for one target language.
    """

    def __init__(self, size=BASE_SIZE, df_hi=DF_HI, df_lo=DF_LO, k=NEIGHBORS, min_sim=MIN_SIM,
                 cap=CAP, source_language="en"):
        self.size = size
        self.df_hi = df_hi
        self.df_lo = df_lo
        self.k = k
        self.min_sim = min_sim
        self.cap = cap
        self.source_language = source_language

    def _check_params(self):
        check_positive_int(self.size, "size")
        check_positive_int(self.k, "k")
        check_positive_int(self.cap, "cap")
        check_fraction(self.df_hi, "df_hi")
        check_fraction(self.df_lo, "df_lo")
        check_fraction(self.min_sim, "min_sim", low=-1.0)
        if self.df_lo > self.df_hi:
            raise ValueError("df_lo must not exceed df_hi")

    def fit(self, spans: Iterable[AnnotatedSpan], y=None, doc_freqs=None):
        self._check_params()
        spans = list(spans)
        self.counts_ = FrameCounts.from_spans(spans, self.source_language)
        dfs = self.counts_.doc_freqs() if doc_freqs is None else doc_freqs
        self.base_lexicons_ = {}
        for frame in FRAMES:
            if self.counts_.frame_totals.get(frame, 0) == 0:
                logger.warning("no annotated spans for frame %s; skipped", frame)
                continue
            self.base_lexicons_[frame] = build_base_lexicon(
                spans, frame, self.size, dfs, self.df_hi, self.df_lo, self.counts_,
                self.source_language)
        return self

    def localize(self, table: Mapping[str, str], store: VectorStore, language: str,
                 doc_freqs: Mapping[str, float] | None = None) -> dict[Frame, FrameLexicon]:
        """Contextualized lexicons for ``language``; frames that fail are logged and left out."""
        check_is_fitted(self, "base_lexicons_")
        out = {}
        for frame, base in self.base_lexicons_.items():
            try:
                translated = translate_lexicon(base, table, language)
                out[frame] = contextualize(translated, store, self.k, self.min_sim, self.cap,
                                           doc_freqs, self.df_hi, self.df_lo)
            except LexiconError as exc:
                logger.warning("%s: %s", language, exc)
                continue
            if not out[frame].entries:
                logger.warning("%s: contextualized lexicon for %s is empty", language, frame)
        return out


def read_translation_table(path) -> dict[str, str]:
    """``source<TAB>target`` TSV; first mapping of a source word wins."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'source<TAB>target'")
            table.setdefault(parts[0].strip().lower(), parts[1].strip())
    return table


def write_lexicons(lexicons: Iterable[FrameLexicon], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for lex in lexicons:
            for word, score in lex.entries:
                fh.write(json.dumps({"frame_code": lex.frame.code, "language": lex.language,
                                     "word": word, "similarity": round(float(score), 8),
                                     "stage": lex.stage}, ensure_ascii=False) + "\n")


def read_lexicons(path, stage: str = "contextualized") -> dict[tuple[str, Frame], FrameLexicon]:
    """Lexicons keyed by ``(language, frame)``; entry order follows the file."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"lexicons not found: {path}")
    grouped: dict[tuple[str, Frame, str], list] = defaultdict(list)
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            r = json.loads(line)
            if r["stage"] != stage:
                continue
            grouped[(r["language"], Frame.from_code(r["frame_code"]), r["stage"])].append(
                (r["word"], float(r["similarity"])))
    return {(lang, frame): FrameLexicon(frame, lang, tuple(entries), st)
            for (lang, frame, st), entries in grouped.items()}
