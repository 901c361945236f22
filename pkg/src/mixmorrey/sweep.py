"""Growth detection on log-spaced sweeps.

A sampled profile ``y(x)`` over a geometric sweep is declared divergent
toward one end when, over the outermost ``end_decades`` of that end, it is
monotone toward the end with a log-log slope of at least ``min_slope``
in magnitude, and the whole sweep spans a factor of at least ``min_growth``.
"""

from __future__ import annotations

import math

import numpy as np


def end_slope(x: np.ndarray, y: np.ndarray, end: str, end_decades: float = 2.0) -> float:
    """Log-log slope over the last ``end_decades`` at ``end`` ('low' or 'high')."""
    lx = np.log10(x)
    ly = np.log10(y)
    if end == "high":
        sel = lx >= lx[-1] - end_decades
    else:
        sel = lx <= lx[0] + end_decades
    xs, ys = lx[sel], ly[sel]
    if xs.size < 2:
        return 0.0
    return float(np.polyfit(xs, ys, 1)[0])


def detect_divergence(
    x,
    y,
    end_decades: float = 2.0,
    min_growth: float = 10.0,
    min_slope: float = 0.05,
) -> bool:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        return True
    if np.any(y <= 0):
        return False
    if np.max(y) / np.min(y) < min_growth:
        return False
    lx = np.log10(x)
    hi = lx >= lx[-1] - end_decades
    lo = lx <= lx[0] + end_decades
    if np.all(np.diff(y[hi]) >= 0) and end_slope(x, y, "high", end_decades) >= min_slope:
        return True
    if np.all(np.diff(y[lo]) <= 0) and end_slope(x, y, "low", end_decades) <= -min_slope:
        return True
    return False


def monotone_growth(values, min_growth: float = 10.0) -> tuple[bool, float]:
    """Whether a sequence is monotone with total growth ``>= min_growth``.

    Returns the flag and the growth factor ``max/min``.
    """
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return True, math.inf
    if v.size < 2 or np.any(v <= 0):
        return False, math.nan
    d = np.diff(v)
    mono = bool(np.all(d >= 0) or np.all(d <= 0))
    growth = float(np.max(v) / np.min(v))
    return mono and growth >= min_growth, growth
