"""Numerical toolkit for mixed-norm Morrey spaces, their operators and weights."""

from __future__ import annotations

from .errors import (
    CorpusError,
    EmptyBallGridWarning,
    EmptySupportError,
    InvalidGridError,
    MixMorreyError,
    PreconditionError,
    SaturationError,
    VanishingTailWarning,
)
from .gridfn import Ball, ExponentVector, GridFunction, dilate_translate, integrate, restrict, sample

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "CorpusError",
    "EmptyBallGridWarning",
    "EmptySupportError",
    "ExponentVector",
    "GridFunction",
    "InvalidGridError",
    "MixMorreyError",
    "PreconditionError",
    "SaturationError",
    "VanishingTailWarning",
    "dilate_translate",
    "integrate",
    "restrict",
    "sample",
]
