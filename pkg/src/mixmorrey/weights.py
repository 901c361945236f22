"""Muckenhoupt-type characteristics and the Rubio de Francia iteration.

Characteristics are maxima over the admissible balls of a ball grid of
products of ball averages.  Ball averages divide by the number of covered
cells, so every per-ball inequality that follows from Jensen or Hölder on a
probability measure (``[w]_{A_p} >= 1``, monotonicity in ``p``) holds on
the grid exactly, up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from .balls import BallGrid, BallSums, default_ball_grid, disk_rows, half_width
from .errors import PreconditionError
from .gridfn import ExponentVector, GridFunction, as_exponents, load, sample
from .norms import SupResult, _argmax_result, mixed_norm
from .operators import hl_maximal


@dataclass(frozen=True, eq=False)
class Weight:
    """A strictly positive, finite grid function."""

    w: GridFunction

    def __post_init__(self) -> None:
        if not np.all(self.w.values > 0):
            raise PreconditionError("weights must be strictly positive on every cell")

    @property
    def values(self) -> np.ndarray:
        return self.w.values


def constant_weight(box, resolution, c: float = 1.0) -> Weight:
    return Weight(sample(lambda *xs: np.full(xs[0].shape, float(c)), box, resolution))


def power_weight(box, resolution, a: float) -> Weight:
    """``|x|^a``, with ``|x|`` clamped below at half a cell width."""
    g = sample(lambda *xs: np.sqrt(sum(x**2 for x in xs)), box, resolution)
    floor = 0.5 * float(np.min(g.widths))
    return Weight(g.with_values(np.maximum(g.values, floor) ** a))


def exponential_weight(box, resolution, rate: float = 1.0) -> Weight:
    return Weight(sample(lambda *xs: np.exp(rate * xs[0]), box, resolution))


def weight_from_file(path: str | Path) -> Weight:
    return Weight(load(path))


def make_weight(family: str, box, resolution, **params) -> Weight:
    """Construct a weight family by name (constant, power, exponential, file)."""
    if family == "constant":
        return constant_weight(box, resolution, params.get("c", 1.0))
    if family == "power":
        if "exponent" not in params:
            raise PreconditionError("power weight needs an 'exponent' parameter")
        return power_weight(box, resolution, params["exponent"])
    if family == "exponential":
        return exponential_weight(box, resolution, params.get("rate", 1.0))
    if family == "file":
        return weight_from_file(params["path"])
    raise PreconditionError(f"unknown weight family {family!r}")


def _as_weight(w) -> Weight:
    return w if isinstance(w, Weight) else Weight(w)


def _averages(g: GridFunction, a: np.ndarray, grid: BallGrid) -> np.ndarray:
    S, count, inside = BallSums(g).sums(a, grid)
    with np.errstate(invalid="ignore", divide="ignore"):
        avg = S / count
    return np.where(inside, avg, np.nan)


def ap_products(w, p: float, ball_grid: BallGrid | None = None) -> np.ndarray:
    """Per-ball ``avg(w) * avg(w^{-p'/p})^{p/p'}``; ``nan`` for inadmissible balls."""
    w = _as_weight(w)
    if not (1.0 < p < math.inf):
        raise PreconditionError(f"A_p needs 1 < p < inf, got {p}")
    grid = ball_grid or default_ball_grid(w.w)
    dual = 1.0 / (p - 1.0)  # p'/p
    v = w.values
    return _averages(w.w, v, grid) * _averages(w.w, v ** (-dual), grid) ** (p - 1.0)


def ap_characteristic(w, p: float, ball_grid: BallGrid | None = None) -> SupResult:
    """``[w]_{A_p}`` as a maximum over the admissible balls of the grid."""
    w = _as_weight(w)
    grid = ball_grid or default_ball_grid(w.w)
    return _argmax_result(ap_products(w, p, grid), grid, w.w, "A_p", {"p": p})


def _ball_minima(g: GridFunction, grid: BallGrid) -> np.ndarray:
    """Minimum of ``g`` over the cells covered by each admissible ball."""
    v = g.values
    ci = grid.center_index
    out = np.full((grid.n_centers, len(grid.radii)), np.nan)
    for k, r in enumerate(grid.radii):
        if g.dim == 1:
            m = half_width(r, g.widths[0])
            if 2 * m + 1 > v.shape[0]:
                continue
            mins = ndimage.minimum_filter1d(v, 2 * m + 1, mode="nearest")
            ok = (ci[:, 0] - m >= 0) & (ci[:, 0] + m < v.shape[0])
        else:
            dj, mm = disk_rows(r, *g.widths)
            M, J = int(mm.max()), int(dj[-1])
            if 2 * M + 1 > v.shape[0] or 2 * J + 1 > v.shape[1]:
                continue
            foot = np.zeros((2 * M + 1, 2 * J + 1), dtype=bool)
            for d, w in zip(dj, mm):
                foot[M - w : M + w + 1, d + J] = True
            mins = ndimage.minimum_filter(v, footprint=foot, mode="nearest")
            ok = (
                (ci[:, 0] - M >= 0) & (ci[:, 0] + M < v.shape[0])
                & (ci[:, 1] - J >= 0) & (ci[:, 1] + J < v.shape[1])
            )
        vals = mins[tuple(ci.T)]
        out[:, k] = np.where(ok, vals, np.nan)
    return out


def a1_characteristic(w, ball_grid: BallGrid | None = None) -> SupResult:
    """``max_B avg_B(w) / min_B(w)`` over the admissible balls."""
    w = _as_weight(w)
    grid = ball_grid or default_ball_grid(w.w)
    ratio = _averages(w.w, w.values, grid) / _ball_minima(w.w, grid)
    return _argmax_result(ratio, grid, w.w, "A_1", {})


def aqp_check(w, q: float, p: float, ball_grid: BallGrid | None = None) -> SupResult:
    """``max_B avg(w) * avg(w^{-q'/p})^{p/q'}`` with ``alpha = n (1/q - 1/p)``.

    This follows the class as written with ``w`` in place of the classical
    ``w^p``; see the README for the convention.
    """
    w = _as_weight(w)
    n = w.w.dim
    alpha = n * (1.0 / q - 1.0 / p)
    if not (0.0 < alpha < n):
        raise PreconditionError(f"need 0 < alpha = n(1/q - 1/p) < n, got alpha = {alpha:g}")
    if not (1.0 < q < n / alpha):
        raise PreconditionError(f"need 1 < q < n/alpha = {n / alpha:g}, got q = {q}")
    grid = ball_grid or default_ball_grid(w.w)
    qc = q / (q - 1.0)
    v = w.values
    prod = _averages(w.w, v, grid) * _averages(w.w, v ** (-qc / p), grid) ** (p / qc)
    return _argmax_result(prod, grid, w.w, "A_qp", {"q": q, "p": p, "alpha": alpha})


# Rubio de Francia ---------------------------------------------------------

#: Inflation applied to the empirical maximal-operator bound.
B_INFLATION = 1.5


def calibration_corpus(like: GridFunction) -> list[GridFunction]:
    """Indicators and bumps on the grid of ``like`` used to estimate ``||M||``."""
    (a, b), *_ = like.box
    mid, span = 0.5 * (a + b), b - a
    out = []
    for frac in (0.02, 0.05, 0.1, 0.25):
        out.append(sample(lambda *xs, f=frac: (np.sqrt(sum((x - mid) ** 2 for x in xs)) < f * span).astype(float),
                          like.box, like.resolution))
    for frac in (0.01, 0.05, 0.15):
        out.append(sample(lambda *xs, f=frac: np.exp(-sum((x - mid) ** 2 for x in xs) / (2 * (f * span) ** 2)),
                          like.box, like.resolution))
    return [g for g in out if np.any(g.values)]


def estimate_maximal_bound(
    q, corpus: Iterable[GridFunction], radii=None, boundary: str = "zero", centered: bool = False
) -> float:
    """Largest ratio ``||M g|| / ||g||`` in the mixed norm ``q`` over a corpus."""
    best = 0.0
    for g in corpus:
        qv = as_exponents(q, g.dim)
        den = mixed_norm(g, qv)
        if den > 0:
            best = max(best, mixed_norm(hl_maximal(g, radii, boundary=boundary, centered=centered), qv) / den)
    if best == 0.0:
        raise PreconditionError("calibration corpus has no nonzero function")
    return best


@dataclass
class RdFResult:
    """Truncated iteration ``sum_{k<=K} M^k h / (2B)^k`` with its checks."""

    Rh: GridFunction
    terms_used: int
    B_bound: float
    tail_estimate: float
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "terms_used": self.terms_used,
            "B_bound": self.B_bound,
            "tail_estimate": self.tail_estimate,
            "checks": self.checks,
        }


def rubio_iteration(
    h: GridFunction,
    q_bar_prime,
    K: int = 20,
    B: float | None = None,
    calibration: Sequence[GridFunction] | None = None,
    radii=None,
    tol: float = 1e-6,
    check: bool = True,
    boundary: str = "zero",
    centered: bool = False,
) -> RdFResult:
    """Build ``Rh`` and check ``h <= Rh``, ``||Rh|| <= 2||h||`` and ``[Rh]_{A_1} <= 2B``.

    ``B`` defaults to ``B_INFLATION`` times the empirical bound of ``M`` on
    ``L^{q_bar_prime}`` over ``calibration`` (itself defaulting to
    :func:`calibration_corpus`).  The tail after ``K`` terms is bounded by
    ``2 ||M^K h||_inf / (2B)^K``; when that exceeds ``tol * max(h)`` the
    truncation is rejected.

    ``M`` defaults to the uncentered operator over the default ball grid's
    radii acting on the zero extension of its argument: uncentered so that
    ``M(Rh) <= 2B Rh`` controls every ball average in the ``A_1`` quotient,
    zero-extended so that ``Rh`` stays strictly positive up to the box
    edges.  The same operator enters the estimate of ``B``.
    """
    if np.any(h.values < 0):
        raise PreconditionError("the iteration needs h >= 0")
    if K < 1:
        raise PreconditionError("K must be >= 1")
    q = as_exponents(q_bar_prime, h.dim)
    if B is None:
        cal = calibration_corpus(h) if calibration is None else calibration
        B = B_INFLATION * estimate_maximal_bound(q, cal, radii, boundary, centered)
    hmax = float(np.max(h.values))
    if hmax == 0.0:
        return RdFResult(h, 1, B, 0.0, {"pointwise": True, "norm": True, "a1": None})
    total = h.values.copy()
    term = h
    for k in range(1, K + 1):
        term = hl_maximal(term, radii, boundary=boundary, centered=centered)
        total = total + term.values / (2.0 * B) ** k
    tail = 2.0 * float(np.max(term.values)) / (2.0 * B) ** K
    if tail > tol * hmax:
        raise PreconditionError(f"K={K} leaves a tail bound {tail:.3e} above tolerance {tol * hmax:.3e}")
    Rh = h.with_values(total)
    checks: dict = {}
    if check:
        nh = mixed_norm(h, q)
        box_norm = mixed_norm(h.with_values(np.ones(h.resolution)), q)
        nR = mixed_norm(Rh, q)
        a1 = a1_characteristic(Rh).value
        checks = {
            "pointwise": bool(np.all(Rh.values >= h.values)),
            "norm_ratio": nR / nh,
            "norm": bool(nR <= 2.0 * nh + tail * box_norm),
            "a1": a1,
            "a1_over_B": a1 / B,
        }
    return RdFResult(Rh, K, B, tail, checks)
