"""Frame prior distributions derived from annotated-corpus frame counts."""
from __future__ import annotations

import csv
import dataclasses
import logging
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import AnnotatedSpan
from .frames import FRAMES, Frame
from .reliability import PriorSpec

logger = logging.getLogger(__name__)

VARIANTS = ("all", "filtered_2plus")


@dataclasses.dataclass(frozen=True)
class FrameCountTable:
    """Per-frame train/test/total annotation counts.

    ``tolerance`` absorbs rounding in published tables, where totals are
    rounded independently of their train/test parts.
    """

    train: Mapping[Frame, float]
    test: Mapping[Frame, float]
    total: Mapping[Frame, float]
    variant: str = "filtered_2plus"
    tolerance: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown count-table variant {self.variant!r}")
        for f in FRAMES:
            for table in (self.train, self.test, self.total):
                if table.get(f, 0) < 0:
                    raise ValueError(f"negative count for {f}")
            gap = abs(self.train.get(f, 0) + self.test.get(f, 0) - self.total.get(f, 0))
            if gap > self.tolerance:
                raise ValueError(f"{f}: train + test != total ({gap} off)")

    def grand_total(self) -> float:
        return sum(self.total.get(f, 0) for f in FRAMES)

    @classmethod
    def from_spans(cls, spans: Iterable[AnnotatedSpan], variant: str = "all") -> "FrameCountTable":
        """Count spans per frame; ``filtered_2plus`` keeps spans with 2+ annotators."""
        counts = {f: 0 for f in FRAMES}
        for s in spans:
            if variant == "filtered_2plus" and s.annotator_count < 2:
                continue
            counts[s.frame] += 1
        return cls(dict(counts), {f: 0 for f in FRAMES}, dict(counts), variant)


def read_count_table(path=None, variant: str = "filtered_2plus",
                     tolerance: float | None = None) -> FrameCountTable:
    """Read ``frame_code,train,test,total,variant`` rows for one variant.

    Without ``path`` the shipped table is used (rounded to 0.1k, so a 100
    count tolerance applies).
    """
    if path is None:
        text = resources.files("polyframe.data").joinpath("mfc_counts.csv").read_text(encoding="utf-8")
        tol = 100.0 if tolerance is None else tolerance
    else:
        text = Path(path).read_text(encoding="utf-8")
        tol = 0.0 if tolerance is None else tolerance
    train, test, total = {}, {}, {}
    for row in csv.DictReader(text.splitlines()):
        if row["variant"] != variant:
            continue
        f = Frame.from_code(row["frame_code"])
        train[f], test[f], total[f] = float(row["train"]), float(row["test"]), float(row["total"])
    if not total:
        raise ValueError(f"no rows for count-table variant {variant!r}")
    return FrameCountTable(train, test, total, variant, tol)


def derive_priors(table: FrameCountTable, mode: str | None = None) -> PriorSpec:
    """``p(F) = total(F) / sum of totals``."""
    grand = table.grand_total()
    if grand <= 0:
        raise ValueError("count table has zero total")
    if mode is None:
        mode = "filtered" if table.variant == "filtered_2plus" else "unfiltered"
    return PriorSpec(mode, {f: table.total.get(f, 0) / grand for f in FRAMES})


def load_priors(path=None) -> dict[str, PriorSpec]:
    """Both prior variants. Without an unfiltered table the filtered one stands in, with a warning."""
    filtered = derive_priors(read_count_table(path, "filtered_2plus"), "filtered")
    try:
        unfiltered = derive_priors(read_count_table(path, "all"), "unfiltered")
    except ValueError:
        logger.warning("no unfiltered frame counts available; using filtered counts for both priors")
        unfiltered = PriorSpec("unfiltered", dict(filtered.distribution))
    return {"filtered": filtered, "unfiltered": unfiltered}


def write_priors(spec: PriorSpec, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame_code", "probability"])
        for f in FRAMES:
            w.writerow([f.code, f"{spec.distribution.get(f, 0.0):.6f}"])


def read_priors(path, mode: str = "filtered") -> PriorSpec:
    """Read a ``frame_code,probability`` CSV; values are renormalized to absorb rounding."""
    with open(path, encoding="utf-8", newline="") as fh:
        dist = {Frame.from_code(r["frame_code"]): float(r["probability"]) for r in csv.DictReader(fh)}
    total = sum(dist.values())
    if total <= 0:
        raise ValueError("prior file has zero total probability")
    return PriorSpec(mode, {f: dist.get(f, 0.0) / total for f in FRAMES})
