"""Small argument checks shared by the estimators."""
from __future__ import annotations

import numbers


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value <= 0:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_fraction(value, name: str, *, low: float = 0.0, high: float = 1.0) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not low <= value <= high:
        raise ValueError(f"{name} must lie in [{low}, {high}], got {value!r}")
    return float(value)


def check_same_language(expected: str, actual: str, what: str = "article") -> None:
    if expected != actual:
        raise ValueError(f"language mismatch: {what} is {actual!r}, expected {expected!r}")
