"""Multilingual media-frame analysis: lexicon induction, pairing, scoring and reliability."""
from .frames import FRAMES, Frame

__version__ = "0.1.0"

__all__ = ["FRAMES", "Frame", "__version__"]
