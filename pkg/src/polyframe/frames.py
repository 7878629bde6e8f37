"""The 14 issue-generic frames of the Policy Frames Codebook.

"Other" and "None" are deliberately not members.
"""
from __future__ import annotations

import enum


class Frame(enum.Enum):
    ECONOMIC = (1, "Economic")
    CAPACITY = (2, "Capacity and Resources")
    MORALITY = (3, "Morality")
    FAIRNESS = (4, "Fairness and Equality")
    LEGALITY = (5, "Legality, Constitutionality, Jurisdiction")
    POLICY = (6, "Policy Prescription and Evaluation")
    CRIME = (7, "Crime and Punishment")
    SECURITY = (8, "Security and Defense")
    HEALTH = (9, "Health and Safety")
    QUALITY_OF_LIFE = (10, "Quality of Life")
    CULTURAL = (11, "Cultural Identity")
    PUBLIC_SENTIMENT = (12, "Public Sentiment")
    POLITICAL = (13, "Political")
    EXTERNAL = (14, "External Regulation and Reputation")

    def __init__(self, code: int, label: str):
        self.code = code
        self.label = label

    def __str__(self) -> str:
        return self.label

    @property
    def code_str(self) -> str:
        """Code in the "1.0" notation used by annotation exports."""
        return f"{self.code}.0"

    @classmethod
    def from_code(cls, code) -> "Frame":
        """Look up a frame by numeric code; accepts 5, 5.0, "5" or "5.0"."""
        try:
            value = float(code)
        except (TypeError, ValueError):
            raise ValueError(f"not a frame code: {code!r}") from None
        if not value.is_integer() or not 1 <= value <= 14:
            raise ValueError(f"frame code out of range: {code!r}")
        return _BY_CODE[int(value)]

    @classmethod
    def from_name(cls, name: str) -> "Frame":
        try:
            return _BY_NAME[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown frame name: {name!r}") from None


_BY_CODE = {f.code: f for f in Frame}
_BY_NAME = {f.label.lower(): f for f in Frame}

FRAMES: tuple[Frame, ...] = tuple(sorted(Frame, key=lambda f: f.code))
N_FRAMES = len(FRAMES)
