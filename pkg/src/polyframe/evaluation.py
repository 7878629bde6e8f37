"""Lexicon intruder-detection tasks and frame-prediction F1 reports."""
from __future__ import annotations

import csv
import dataclasses
import random
from collections import defaultdict
from typing import Iterable, Mapping

import numpy as np

from .frames import FRAMES, Frame
from .lexicon import FrameLexicon

SET_SIZE = 6
SETS_PER_FRAME = 15
SOFT_CUTOFF = 0.60
MAX_ATTEMPTS = 100


@dataclasses.dataclass(frozen=True)
class IntruderSet:
    set_id: str
    frame: Frame
    words: tuple[str, ...]
    intruder_index: int
    intruder_source_frame: Frame

    @property
    def intruder(self) -> str:
        return self.words[self.intruder_index]


@dataclasses.dataclass(frozen=True)
class IntruderResponse:
    set_id: str
    annotator_id: str
    chosen_index: int

    def __post_init__(self):
        if not 0 <= self.chosen_index < SET_SIZE:
            raise ValueError(f"chosen_index must be in [0, {SET_SIZE}), got {self.chosen_index}")


def gen_intruder_sets(lexicons: Mapping[Frame, FrameLexicon], sets_per_frame: int = SETS_PER_FRAME,
                      seed: int = 0) -> list[IntruderSet]:
    """Five words from a frame's lexicon plus one intruder from another frame's lexicon.

    The intruder frame is drawn uniformly among the other frames, then the
    word uniformly among its words absent from the target lexicon; draws are
    retried up to 100 times. Words may repeat across sets.
    """
    if len(lexicons) < 2:
        raise ValueError("intruder sets need at least two frame lexicons")
    for frame, lex in lexicons.items():
        if len(set(lex.words)) < SET_SIZE - 1:
            raise ValueError(f"lexicon for {frame} has fewer than {SET_SIZE - 1} words")
    rng = random.Random(seed)
    frames = sorted(lexicons, key=lambda f: f.code)
    out = []
    for frame in frames:
        own = sorted(set(lexicons[frame].words))
        own_set = set(own)
        others = [f for f in frames if f != frame]
        for n in range(sets_per_frame):
            words = rng.sample(own, SET_SIZE - 1)
            for _ in range(MAX_ATTEMPTS):
                source = rng.choice(others)
                eligible = sorted(set(lexicons[source].words) - own_set)
                if eligible:
                    intruder = rng.choice(eligible)
                    break
            else:
                raise ValueError(f"no eligible intruder for {frame} after {MAX_ATTEMPTS} attempts")
            position = rng.randrange(SET_SIZE)
            words.insert(position, intruder)
            out.append(IntruderSet(f"{frame.code}-{n + 1:02d}", frame, tuple(words), position, source))
    return out


@dataclasses.dataclass(frozen=True)
class IntruderScore:
    per_frame: dict[Frame, tuple[float, float]]
    soft: float
    hard: float

    def flagged(self, cutoff: float = SOFT_CUTOFF) -> list[Frame]:
        """Frames whose soft accuracy falls below ``cutoff``."""
        return [f for f, (soft, _) in self.per_frame.items() if soft < cutoff]


def score_intruder(sets: Iterable[IntruderSet], responses: Iterable[IntruderResponse]) -> IntruderScore:
    """Soft (either annotator right) and hard (both right) accuracy per frame.

    Requires exactly two annotators, each answering every set.
    """
    sets = list(sets)
    answers: dict[str, dict[str, int]] = defaultdict(dict)
    annotators = set()
    for r in responses:
        answers[r.set_id][r.annotator_id] = r.chosen_index
        annotators.add(r.annotator_id)
    if len(annotators) != 2:
        raise ValueError(f"expected responses from two annotators, got {len(annotators)}")
    missing = [s.set_id for s in sets if len(answers.get(s.set_id, {})) != 2]
    if missing:
        raise ValueError(f"missing responses for sets: {missing}")
    tallies: dict[Frame, list[int]] = defaultdict(lambda: [0, 0, 0])
    for s in sets:
        correct = [idx == s.intruder_index for idx in answers[s.set_id].values()]
        t = tallies[s.frame]
        t[0] += 1
        t[1] += any(correct)
        t[2] += all(correct)
    per_frame = {f: (t[1] / t[0], t[2] / t[0]) for f, t in sorted(tallies.items(), key=lambda kv: kv[0].code)}
    soft = float(np.mean([v[0] for v in per_frame.values()]))
    hard = float(np.mean([v[1] for v in per_frame.values()]))
    return IntruderScore(per_frame, soft, hard)


def write_intruder_tasks(sets: Iterable[IntruderSet], path, key_path=None) -> None:
    """Fillable task CSV (set_id, frame_code, w1..w6) and an optional answer key."""
    sets = list(sets)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["set_id", "frame_code", *[f"w{i + 1}" for i in range(SET_SIZE)]])
        for s in sets:
            w.writerow([s.set_id, s.frame.code, *s.words])
    if key_path is not None:
        with open(key_path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["set_id", "frame_code", "intruder_index", "intruder_source_frame",
                        *[f"w{i + 1}" for i in range(SET_SIZE)]])
            for s in sets:
                w.writerow([s.set_id, s.frame.code, s.intruder_index, s.intruder_source_frame.code,
                            *s.words])


def read_intruder_key(path) -> list[IntruderSet]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [IntruderSet(r["set_id"], Frame.from_code(r["frame_code"]),
                            tuple(r[f"w{i + 1}"] for i in range(SET_SIZE)), int(r["intruder_index"]),
                            Frame.from_code(r["intruder_source_frame"]))
                for r in csv.DictReader(fh)]


def read_intruder_responses(path) -> list[IntruderResponse]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [IntruderResponse(r["set_id"], r["annotator_id"], int(r["chosen_index"]))
                for r in csv.DictReader(fh)]


@dataclasses.dataclass(frozen=True)
class F1Report:
    precision: dict[Frame, float]
    recall: dict[Frame, float]
    f1: dict[Frame, float]
    support: dict[Frame, int]
    macro_f1: float
    confusion: np.ndarray  # counts, gold rows x predicted columns

    def normalized_confusion(self) -> np.ndarray:
        rows = self.confusion.sum(axis=1, keepdims=True)
        return np.divide(self.confusion, rows, out=np.zeros_like(self.confusion, dtype=float),
                         where=rows > 0)

    def to_csv(self, path, confusion_path=None) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["frame_code", "frame", "precision", "recall", "f1", "support"])
            for f in FRAMES:
                w.writerow([f.code, f.label, f"{100 * self.precision[f]:.1f}",
                            f"{100 * self.recall[f]:.1f}", f"{100 * self.f1[f]:.1f}", self.support[f]])
            w.writerow(["", "Macro-F1", "", "", f"{100 * self.macro_f1:.1f}", sum(self.support.values())])
        if confusion_path is not None:
            norm = self.normalized_confusion()
            with open(confusion_path, "w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["gold\\predicted", *[f.code for f in FRAMES]])
                for f, row in zip(FRAMES, norm):
                    w.writerow([f.code, *[f"{x:.4f}" for x in row]])


def frame_f1(predicted: Mapping, gold: Mapping, all_frames: bool = False) -> F1Report:
    """One-vs-rest per-frame scores over shared items, macro-F1 and a 14x14 confusion matrix.

    Macro-F1 averages frames seen in gold or predictions unless ``all_frames``.
    """
    shared = sorted(predicted.keys() & gold.keys(), key=str)
    if not shared:
        raise ValueError("no shared items between predictions and gold")
    confusion = np.zeros((len(FRAMES), len(FRAMES)), dtype=np.int64)
    for item in shared:
        confusion[gold[item].code - 1, predicted[item].code - 1] += 1
    tp = np.diag(confusion).astype(float)
    pred_n = confusion.sum(axis=0).astype(float)
    gold_n = confusion.sum(axis=1).astype(float)
    precision = np.divide(tp, pred_n, out=np.zeros(len(FRAMES)), where=pred_n > 0)
    recall = np.divide(tp, gold_n, out=np.zeros(len(FRAMES)), where=gold_n > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros(len(FRAMES)), where=denom > 0)
    active = np.ones(len(FRAMES), bool) if all_frames else (pred_n + gold_n) > 0
    return F1Report(
        precision=dict(zip(FRAMES, precision.tolist())),
        recall=dict(zip(FRAMES, recall.tolist())),
        f1=dict(zip(FRAMES, f1.tolist())),
        support=dict(zip(FRAMES, gold_n.astype(int).tolist())),
        macro_f1=float(f1[active].mean()),
        confusion=confusion,
    )


def read_frame_labels(path) -> dict[str, Frame]:
    """``item_id,frame_code`` CSV to a mapping."""
    with open(path, encoding="utf-8", newline="") as fh:
        return {r["item_id"]: Frame.from_code(r["frame_code"]) for r in csv.DictReader(fh)}
