"""Majority-vote frame presence and normalized PMI of frames against article groups."""
from __future__ import annotations

import csv
import dataclasses
import math
from collections import Counter
from typing import Iterable, Mapping, Sequence

from .corpus import Article, tokenize
from .frames import FRAMES, Frame
from .lexicon import FrameLexicon
from .scoring import PresenceVector


def majority_presence(lb: PresenceVector, tb: PresenceVector) -> PresenceVector:
    """A frame counts as present only when both methods find it."""
    if lb.article_id != tb.article_id:
        raise ValueError(f"article mismatch: {lb.article_id!r} vs {tb.article_id!r}")
    return PresenceVector(lb.article_id, "majority",
                          tuple(a and b for a, b in zip(lb.presence, tb.presence)))


@dataclasses.dataclass(frozen=True)
class GroupingSpec:
    axis: str
    groups: Mapping[str, frozenset[str]]

    def __post_init__(self):
        if self.axis not in ("language", "region"):
            raise ValueError(f"unknown grouping axis {self.axis!r}")
        seen: set[str] = set()
        for name, members in self.groups.items():
            if seen & members:
                raise ValueError(f"group {name!r} overlaps another group")
            seen |= members

    @classmethod
    def by_language(cls, articles: Iterable[Article], order: Sequence[str] | None = None) -> "GroupingSpec":
        return cls._build("language", articles, lambda a: a.language, order)

    @classmethod
    def by_region(cls, articles: Iterable[Article], order: Sequence[str] | None = None) -> "GroupingSpec":
        return cls._build("region", articles, lambda a: a.region, order)

    @classmethod
    def _build(cls, axis, articles, key, order):
        groups: dict[str, set[str]] = {}
        for a in articles:
            g = key(a)
            if g is None:
                continue
            if order is not None and g not in order:
                continue
            groups.setdefault(g, set()).add(a.id)
        names = [g for g in order if g in groups] if order is not None else sorted(groups)
        return cls(axis, {g: frozenset(groups[g]) for g in names})


@dataclasses.dataclass(frozen=True)
class SalienceMatrix:
    groups: tuple[str, ...]
    values: Mapping[tuple[Frame, str], float]
    joint: Mapping[tuple[Frame, str], int]
    frame_totals: Mapping[Frame, int]
    group_totals: Mapping[str, int]
    total: int

    def __getitem__(self, key: tuple[Frame, str]) -> float:
        return self.values[key]

    def undefined(self) -> list[tuple[Frame, str]]:
        """Cells set to -1 because the frame never occurs in the group."""
        return [k for k, n in self.joint.items() if n == 0]

    def to_csv(self, path, decimals: int = 4) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["frame", *self.groups])
            for f in FRAMES:
                w.writerow([f.label, *[f"{self.values[(f, g)]:.{decimals}f}" for g in self.groups]])


def npmi(presences: Iterable[PresenceVector], grouping: GroupingSpec) -> SalienceMatrix:
    """nPMI between "frame F present" and "article in group G".

    Events are (article, present frame) pairs over grouped articles:
    ``nPMI = ln(p(F,G) / (p(F) p(G))) / -ln p(F,G)``; cells with no joint
    occurrence are -1.
    """
    by_id = {p.article_id: p for p in presences}
    for name, members in grouping.groups.items():
        if not members:
            raise ValueError(f"empty group {name!r}")
        missing = sorted(members - by_id.keys())
        if missing:
            raise ValueError(f"group {name!r}: no presence vector for {missing[:5]}")
    joint: Counter = Counter()
    for name, members in grouping.groups.items():
        for aid in members:
            for f in by_id[aid].present_frames:
                joint[(f, name)] += 1
    groups = tuple(grouping.groups)
    n_f = {f: sum(joint[(f, g)] for g in groups) for f in FRAMES}
    n_g = {g: sum(joint[(f, g)] for f in FRAMES) for g in groups}
    total = sum(n_g.values())
    values = {}
    joint_full = {}
    for f in FRAMES:
        for g in groups:
            n = joint[(f, g)]
            joint_full[(f, g)] = n
            if n == 0:
                values[(f, g)] = -1.0
                continue
            if n == total:
                values[(f, g)] = 1.0
                continue
            # Log-count form keeps exact co-occurrence at exactly 1.0.
            pmi = (math.log(total) - math.log(n_g[g])) + (math.log(n) - math.log(n_f[f]))
            values[(f, g)] = max(-1.0, min(1.0, pmi / (math.log(total) - math.log(n))))
    return SalienceMatrix(groups, values, joint_full, n_f, n_g, total)


def top_frame_words(frame: Frame, articles: Iterable[Article], lexicon: FrameLexicon,
                    n: int = 5) -> list[str]:
    """Lexicon words of ``frame`` most frequent in ``articles`` (ties by lexicon similarity)."""
    if lexicon.frame != frame:
        raise ValueError(f"lexicon is for {lexicon.frame}, not {frame}")
    counts: Counter = Counter()
    words = dict(lexicon.entries)
    for a in articles:
        if a.language != lexicon.language:
            raise ValueError(f"language mismatch: article {a.id} is {a.language!r}")
        counts.update(t for t in tokenize(a.body, a.language) if t in words)
    ranked = sorted(counts, key=lambda w: (-counts[w], -words[w], w))
    return ranked[:n]
