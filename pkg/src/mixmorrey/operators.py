"""Maximal, fractional and singular operators on grid functions, and commutators.

Conventions shared by every operator here:

* Averages over ``B(x, r)`` divide by the measure of the covered cells, and
  only balls whose stencil stays inside the box enter a supremum.  Where no
  test radius fits, ``M f(x)`` falls back to ``|f(x)|`` (its small-ball
  limit) and ``M_alpha f(x)`` to 0.
* Kernel operators integrate the kernel exactly over each source cell in
  1-D, so they are exact for cellwise-constant inputs; the 2-D Riesz
  potential uses the midpoint rule off the diagonal and an exact self-cell
  weight.
* ``at=`` evaluates at arbitrary points (1-D) instead of at the cell centers.
* ``b(x)`` at an arbitrary point is the value of the cell containing ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate as sp_integrate
from scipy import ndimage
from scipy.signal import fftconvolve

from .balls import _WindowTable, _prefix, disk_rows, half_width, point_windows_1d, radius_grid
from .errors import PreconditionError
from .gridfn import GridFunction

#: Rows per chunk of the O(N^2) commutator sweeps.
_ROW_CHUNK = 256

KINDS = (
    "maximal",
    "frac_maximal",
    "riesz_potential",
    "pv_kernel",
    "envelope",
    "commutator_maximal",
    "commutator_riesz",
    "commutator_pv",
)


def default_radii(f: GridFunction, per_decade: int = 32) -> np.ndarray:
    """The norms module's default radii: one cell width up to the box diameter."""
    return radius_grid(float(np.min(f.widths)), f.diameter, per_decade)


def _radii(f: GridFunction, radii) -> np.ndarray:
    r = default_radii(f) if radii is None else np.atleast_1d(np.asarray(radii, dtype=float))
    if r.size == 0 or np.any(r <= 0) or not np.all(np.isfinite(r)):
        raise PreconditionError("radius set must be nonempty, positive and finite")
    return r


def _check_alpha(alpha: float, dim: int, allow_zero: bool = False) -> float:
    alpha = float(alpha)
    lo_ok = alpha >= 0 if allow_zero else alpha > 0
    if not (lo_ok and alpha < dim):
        bound = "[0, n)" if allow_zero else "(0, n)"
        raise PreconditionError(f"alpha must lie in {bound} with n={dim}, got {alpha}")
    return alpha


def _cell_values_at(b: GridFunction, x: np.ndarray) -> np.ndarray:
    return np.array([b.values[b.cell_index(p)] for p in np.atleast_2d(x.reshape(len(x), -1))])


# maximal type -------------------------------------------------------------


def _sup_averages(f: GridFunction, radii: np.ndarray, alpha: float, at, boundary: str = "exclude") -> np.ndarray:
    """``max_r mu(B)^{alpha/n - 1} * int_B |f|`` over admissible balls (nan if none).

    With ``boundary="zero"`` ``f`` is extended by zero and every ball counts,
    its measure including the part outside the box.
    """
    if boundary not in ("exclude", "zero"):
        raise PreconditionError(f"boundary must be 'exclude' or 'zero', got {boundary!r}")
    zero = boundary == "zero"
    a = np.abs(f.values)
    n = f.dim
    expo = alpha / n - 1.0
    if n == 1:
        h = f.widths[0]
        T = _WindowTable(a)
        if at is None:
            idx = np.arange(f.resolution[0])
            m = np.array([half_width(r, h) for r in radii])
            lo = idx[:, None] - m[None, :]
            hi = idx[:, None] + m[None, :] + 1
            inside = (lo >= 0) & (hi <= f.resolution[0])
            full = (hi - lo) * h
            lo = np.clip(lo, 0, f.resolution[0])
            hi = np.clip(hi, 0, f.resolution[0])
        else:
            lo, hi, inside = point_windows_1d(f, np.atleast_1d(np.asarray(at, dtype=float)), radii)
            inside &= hi > lo
            full = 2.0 * radii[None, :] * np.ones((lo.shape[0], 1))
        count = full if zero else np.maximum(hi - lo, 1) * h
        if zero:
            inside = np.ones_like(inside)
        vals = T.take(lo, hi) * h * count**expo
        vals = np.where(inside, vals, -np.inf)
        out = vals.max(axis=1)
        return np.where(np.isfinite(out), out, np.nan)
    if at is not None:
        raise PreconditionError("point evaluation is implemented for 1-D grids only")
    h1, h2 = f.widths
    n1, n2 = f.resolution
    best = np.full(f.resolution, -np.inf)
    for r in radii:
        dj, m = disk_rows(r, h1, h2)
        M, J = int(m.max()), int(dj[-1])
        if not zero and (2 * M + 1 > n1 or 2 * J + 1 > n2):
            continue
        stencil = np.zeros((2 * M + 1, 2 * J + 1))
        for d, mm in zip(dj, m):
            stencil[M - mm : M + mm + 1, d + J] = 1.0
        count = stencil.sum() * h1 * h2
        S = fftconvolve(a, stencil, mode="same") * h1 * h2
        S = np.maximum(S, 0.0)
        val = S * count**expo
        ok = np.zeros(f.resolution, dtype=bool)
        ok[M : n1 - M, J : n2 - J] = True
        if zero:
            ok[:] = True
        best = np.where(ok & (val > best), val, best)
    return np.where(np.isfinite(best), best, np.nan)


def _uncentered(f: GridFunction, radii: np.ndarray, boundary: str) -> np.ndarray:
    """``max`` of ball averages over the cell-centered balls that contain each cell."""
    a = np.abs(f.values)
    zero = boundary == "zero"
    best = np.full(f.resolution, -np.inf)
    if f.dim == 1:
        N, h = f.resolution[0], f.widths[0]
        T = _WindowTable(a)
        idx = np.arange(N)
        for r in radii:
            m = half_width(r, h)
            lo, hi = idx - m, idx + m + 1
            ok = (lo >= 0) & (hi <= N)
            if not (zero or ok.any()):
                continue
            avg = T.take(np.clip(lo, 0, N), np.clip(hi, 0, N)) / (2 * m + 1)
            avg = np.where(ok | zero, avg, -np.inf)
            best = np.maximum(best, ndimage.maximum_filter1d(avg, 2 * m + 1, mode="constant", cval=-np.inf))
        return best
    h1, h2 = f.widths
    n1, n2 = f.resolution
    for r in radii:
        dj, m = disk_rows(r, h1, h2)
        M, J = int(m.max()), int(dj[-1])
        if not zero and (2 * M + 1 > n1 or 2 * J + 1 > n2):
            continue
        foot = np.zeros((2 * M + 1, 2 * J + 1), dtype=bool)
        for d, mm in zip(dj, m):
            foot[M - mm : M + mm + 1, d + J] = True
        avg = np.maximum(fftconvolve(a, foot.astype(float), mode="same"), 0.0) / foot.sum()
        if not zero:
            ok = np.zeros(f.resolution, dtype=bool)
            ok[M : n1 - M, J : n2 - J] = True
            avg = np.where(ok, avg, -np.inf)
        best = np.maximum(best, ndimage.maximum_filter(avg, footprint=foot, mode="constant", cval=-np.inf))
    return best


def hl_maximal(f: GridFunction, radii=None, at=None, boundary: str = "exclude", centered: bool = True):
    """Hardy-Littlewood maximal function over the radius set.

    Returns a :class:`GridFunction` on ``f``'s grid, or an array of values
    at the points ``at``.  ``boundary="zero"`` evaluates ``M`` of the
    zero extension of ``f`` instead of discarding balls that leave the box.
    ``centered=False`` takes the sup over every cell-centered ball of the
    radius set that contains the evaluation cell (grid output only).
    """
    radii = _radii(f, radii)
    if not centered:
        if at is not None:
            raise PreconditionError("the uncentered maximal function is evaluated on the grid only")
        if boundary not in ("exclude", "zero"):
            raise PreconditionError(f"boundary must be 'exclude' or 'zero', got {boundary!r}")
        out = _uncentered(f, radii, boundary)
        return f.with_values(np.where(np.isfinite(out), out, np.abs(f.values)))
    out = _sup_averages(f, radii, 0.0, at, boundary)
    if at is None:
        out = np.where(np.isnan(out), np.abs(f.values), np.maximum(out, 0.0))
        return f.with_values(out)
    pts = np.atleast_1d(np.asarray(at, dtype=float))
    return np.where(np.isnan(out), np.abs(_cell_values_at(f, pts)), out)


def frac_maximal(f: GridFunction, alpha: float, radii=None, at=None, boundary: str = "exclude"):
    """Fractional maximal function ``sup_r |B|^{alpha/n - 1} int_B |f|``."""
    alpha = _check_alpha(alpha, f.dim)
    out = _sup_averages(f, _radii(f, radii), alpha, at, boundary)
    out = np.nan_to_num(out, nan=0.0)
    return f.with_values(out) if at is None else out


# kernel operators ---------------------------------------------------------


def _riesz_antiderivative(u, alpha: float):
    """``F`` with ``F' = |u|^{alpha-1}``, odd, for the 1-D Riesz kernel."""
    u = np.asarray(u, dtype=float)
    return np.sign(u) * np.abs(u) ** alpha / alpha


def _log_antiderivative(u):
    """``ln|u|``, an antiderivative of ``1/u``; ``-inf`` at 0."""
    with np.errstate(divide="ignore"):
        return np.log(np.abs(np.asarray(u, dtype=float)))


def _toeplitz_apply(f: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``out_i = sum_j w[i - j] f_j`` with ``w`` indexed from ``-(N-1)``."""
    N = f.shape[0]
    return fftconvolve(f, w, mode="full")[N - 1 : 2 * N - 1]


def _riesz_weights_1d(N: int, h: float, alpha: float) -> np.ndarray:
    k = np.arange(-(N - 1), N)
    return _riesz_antiderivative((k + 0.5) * h, alpha) - _riesz_antiderivative((k - 0.5) * h, alpha)


def _self_cell_weight(h1: float, h2: float, alpha: float) -> float:
    """``int_{cell} |u|^{alpha-2} du`` over a centered ``h1 x h2`` rectangle."""
    a, b = h1 / 2.0, h2 / 2.0
    t0 = math.atan2(b, a)
    one = sp_integrate.quad(lambda t: (a / math.cos(t)) ** alpha, 0.0, t0)[0]
    two = sp_integrate.quad(lambda t: (b / math.sin(t)) ** alpha, t0, math.pi / 2)[0]
    return 4.0 * (one + two) / alpha


def _riesz_weights_2d(shape, h1: float, h2: float, alpha: float) -> np.ndarray:
    n1, n2 = shape
    k1 = np.arange(-(n1 - 1), n1)[:, None] * h1
    k2 = np.arange(-(n2 - 1), n2)[None, :] * h2
    d2 = k1**2 + k2**2
    d2[n1 - 1, n2 - 1] = 1.0
    w = d2 ** ((alpha - 2.0) / 2.0) * h1 * h2
    w[n1 - 1, n2 - 1] = _self_cell_weight(h1, h2, alpha)
    return w


def _cell_edges(f: GridFunction):
    c = f.axis_centers(0)
    h = f.widths[0]
    return c - h / 2.0, c + h / 2.0


def riesz_potential(f: GridFunction, alpha: float, at=None):
    """``I_alpha f(x) = int f(y) |x - y|^{alpha - n} dy`` over the box."""
    alpha = _check_alpha(alpha, f.dim)
    v = f.values
    if f.dim == 1:
        if at is None:
            w = _riesz_weights_1d(f.resolution[0], f.widths[0], alpha)
            return f.with_values(_toeplitz_apply(v, w))
        x = np.atleast_1d(np.asarray(at, dtype=float))[:, None]
        lo, hi = _cell_edges(f)
        W = _riesz_antiderivative(x - lo[None, :], alpha) - _riesz_antiderivative(x - hi[None, :], alpha)
        return W @ v
    if at is not None:
        raise PreconditionError("point evaluation is implemented for 1-D grids only")
    h1, h2 = f.widths
    w = _riesz_weights_2d(f.resolution, h1, h2, alpha)
    n1, n2 = f.resolution
    out = fftconvolve(v, w, mode="full")[n1 - 1 : 2 * n1 - 1, n2 - 1 : 2 * n2 - 1]
    return f.with_values(out)


def _pv_point_weights(f: GridFunction, x: np.ndarray):
    """``int_{cell j} dy / (x - y)`` with boundary logs paired across neighbours.

    A point on the edge shared by cells ``j`` and ``j+1`` sees ``-ln 0`` from
    one and ``+ln 0`` from the other; the pair cancels whenever both cells
    carry the same value, which is the principal-value prescription.
    """
    lo, hi = _cell_edges(f)
    ulo = x[:, None] - lo[None, :]
    uhi = x[:, None] - hi[None, :]
    tiny = 1e-12 * float(np.min(f.widths))
    A = np.where(np.abs(ulo) > tiny, _log_antiderivative(ulo), 0.0)
    B = np.where(np.abs(uhi) > tiny, _log_antiderivative(uhi), 0.0)
    # sign: int_lo^hi dy/(x-y) = ln|x-lo| - ln|x-hi|
    W = A - B
    hits_lo = np.abs(ulo) <= tiny
    hits_hi = np.abs(uhi) <= tiny
    return W, hits_lo, hits_hi


def pv_kernel(f: GridFunction, at=None):
    """Principal value of ``int f(y) / (x - y) dy`` (1-D)."""
    if f.dim != 1:
        raise PreconditionError("the principal-value kernel is implemented in 1-D only")
    v = f.values
    if at is None:
        N, h = f.resolution[0], f.widths[0]
        k = np.arange(-(N - 1), N)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.log(np.abs(k * h + h / 2.0)) - np.log(np.abs(k * h - h / 2.0))
        w[N - 1] = 0.0
        return f.with_values(_toeplitz_apply(v, w))
    x = np.atleast_1d(np.asarray(at, dtype=float))
    W, hits_lo, hits_hi = _pv_point_weights(f, x)
    out = W @ v
    # a point on an edge diverges logarithmically unless the jump there is 0
    jump = (hits_lo * v[None, :]).sum(axis=1) - (hits_hi * v[None, :]).sum(axis=1)
    return np.where(np.abs(jump) > 0, np.copysign(np.inf, -jump), out)


# size envelopes -----------------------------------------------------------


def _distance_to_support(f: GridFunction, x: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to the union of nonzero cells."""
    supp = np.nonzero(f.values != 0)
    if supp[0].size == 0:
        return np.full(len(x), np.inf)
    d2 = np.zeros((len(x), supp[0].size))
    for k in range(f.dim):
        c = f.axis_centers(k)[supp[k]]
        gap = np.maximum(np.abs(x[:, k][:, None] - c[None, :]) - f.widths[k] / 2.0, 0.0)
        d2 += gap**2
    return np.sqrt(d2.min(axis=1))


def _envelope_weights(f: GridFunction, alpha: float, x: np.ndarray) -> np.ndarray:
    """Nonnegative weights ``W[i, j] ~ int_{cell j} |x_i - y|^{alpha - n} dy``."""
    if f.dim == 1:
        lo, hi = _cell_edges(f)
        ulo = x[:, 0][:, None] - lo[None, :]
        uhi = x[:, 0][:, None] - hi[None, :]
        if alpha > 0:
            return _riesz_antiderivative(ulo, alpha) - _riesz_antiderivative(uhi, alpha)
        return np.abs(_log_antiderivative(ulo) - _log_antiderivative(uhi))
    X1, X2 = f.centers()
    d2 = (x[:, 0][:, None] - X1.ravel()[None, :]) ** 2 + (x[:, 1][:, None] - X2.ravel()[None, :]) ** 2
    h1, h2 = f.widths
    with np.errstate(divide="ignore"):
        W = d2 ** ((alpha - 2.0) / 2.0) * h1 * h2
    if alpha > 0:
        self_w = _self_cell_weight(h1, h2, alpha)
        near = d2 < (1e-9 * min(h1, h2)) ** 2
        W = np.where(near, self_w, W)
    return W


def _envelope_core(f: GridFunction, alpha: float, x, weight_b=None) -> np.ndarray:
    alpha = _check_alpha(alpha, f.dim, allow_zero=True)
    pts = np.atleast_2d(np.asarray(x, dtype=float).reshape(-1, f.dim))
    if alpha == 0:
        dist = _distance_to_support(f, pts)
        if np.any(dist < float(np.min(f.widths)) * (1 - 1e-9)):
            raise PreconditionError(
                "the alpha = 0 envelope needs x at distance >= one cell from supp f"
            )
    with np.errstate(invalid="ignore"):
        W = _envelope_weights(f, alpha, pts)
    a = np.abs(f.values).ravel()
    # cells outside the support contribute nothing, whatever their weight
    W = np.where(a[None, :] > 0, W, 0.0)
    if weight_b is None:
        return W @ a
    bx = _cell_values_at(weight_b, pts)
    return np.sum(W * np.abs(bx[:, None] - weight_b.values.ravel()[None, :]) * a[None, :], axis=1)


def envelope(f: GridFunction, alpha: float, x):
    """``int |f(y)| |x - y|^{alpha - n} dy`` at the point(s) ``x``.

    This dominates every operator of the corresponding size class.  For
    ``alpha = 0`` the integral converges only away from the support, so
    ``x`` must keep a distance of at least one cell from ``supp f``.
    """
    out = _envelope_core(f, alpha, x)
    return float(out[0]) if np.ndim(x) <= (0 if f.dim == 1 else 1) else out


def envelope_commutator(b: GridFunction, f: GridFunction, alpha: float, x):
    """``int |b(x) - b(y)| |f(y)| |x - y|^{alpha - n} dy`` at the point(s) ``x``."""
    if not b.same_grid(f):
        raise PreconditionError("symbol and function live on different grids")
    out = _envelope_core(f, alpha, x, weight_b=b)
    return float(out[0]) if np.ndim(x) <= (0 if f.dim == 1 else 1) else out


# commutators --------------------------------------------------------------


def _check_symbol(b: GridFunction | None, f: GridFunction) -> GridFunction:
    if b is None:
        raise PreconditionError("commutators need a symbol b")
    if not b.same_grid(f):
        raise PreconditionError("symbol and function live on different grids")
    return b


def commutator_maximal(b: GridFunction, f: GridFunction, alpha: float = 0.0, radii=None, at=None):
    """``sup_r |B|^{alpha/n - 1} int_B |b(x) - b(y)| |f(y)| dy`` (1-D).

    ``alpha = 0`` gives the maximal commutator ``[b, M]``.  The sweep costs
    O(N) per evaluation point; rows are processed in chunks.
    """
    b = _check_symbol(b, f)
    alpha = _check_alpha(alpha, f.dim, allow_zero=True)
    if f.dim != 1:
        raise PreconditionError("maximal commutators are implemented in 1-D only")
    radii = _radii(f, radii)
    N, h = f.resolution[0], f.widths[0]
    a = np.abs(f.values)
    nz = np.nonzero(a)[0]
    if at is None:
        xb = b.values
        idx = np.arange(N)
        m = np.array([half_width(r, h) for r in radii])
        lo = idx[:, None] - m[None, :]
        hi = idx[:, None] + m[None, :] + 1
        inside = (lo >= 0) & (hi <= N)
    else:
        pts = np.atleast_1d(np.asarray(at, dtype=float))
        xb = _cell_values_at(b, pts)
        lo, hi, inside = point_windows_1d(f, pts, radii)
        inside &= hi > lo
    out = np.zeros(len(xb))
    if nz.size == 0:
        return f.with_values(out) if at is None else out
    j0, j1 = int(nz[0]), int(nz[-1]) + 1
    seg_a, seg_b = a[j0:j1], b.values[j0:j1]
    mu = np.maximum(hi - lo, 1) * h
    scale = mu ** (alpha - 1.0)
    lo_s = np.clip(lo, j0, j1) - j0
    hi_s = np.clip(hi, j0, j1) - j0
    for s in range(0, len(xb), _ROW_CHUNK):
        sl = slice(s, s + _ROW_CHUNK)
        G = np.abs(xb[sl, None] - seg_b[None, :]) * seg_a[None, :]
        P = _prefix(G, axis=1)
        rows = np.arange(P.shape[0])[:, None]
        S = (P[rows, hi_s[sl]] - P[rows, lo_s[sl]]) * h
        vals = np.where(inside[sl], S * scale[sl], 0.0)
        out[sl] = vals.max(axis=1)
    return f.with_values(out) if at is None else out


def _linear_commutator(op, b: GridFunction, f: GridFunction, at=None):
    if at is None:
        return f.with_values(b.values * op(f).values - op(b * f).values)
    pts = np.atleast_1d(np.asarray(at, dtype=float))
    return _cell_values_at(b, pts) * op(f, at=pts) - op(b * f, at=pts)


def commutator_riesz(b: GridFunction, f: GridFunction, alpha: float, at=None):
    """``[b, I_alpha] f = b I_alpha f - I_alpha(b f)``."""
    b = _check_symbol(b, f)
    alpha = _check_alpha(alpha, f.dim)
    return _linear_commutator(lambda g, at=None: riesz_potential(g, alpha, at=at), b, f, at)


def commutator_pv(b: GridFunction, f: GridFunction, at=None):
    """``[b, K] f = b K f - K(b f)`` for the principal-value kernel."""
    b = _check_symbol(b, f)
    return _linear_commutator(pv_kernel, b, f, at)


# dispatch -----------------------------------------------------------------

_ALPHA_RULE = {
    "maximal": "zero",
    "pv_kernel": "zero",
    "commutator_pv": "zero",
    "frac_maximal": "positive",
    "riesz_potential": "positive",
    "commutator_riesz": "positive",
    "envelope": "any",
    "commutator_maximal": "any",
}


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """Operator kind, order ``alpha`` and (for commutators) the symbol ``b``."""

    kind: str
    alpha: float = 0.0
    symbol_b: GridFunction | None = None
    radii: Sequence[float] | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown operator kind {self.kind!r}; expected one of {KINDS}")
        rule = _ALPHA_RULE[self.kind]
        if rule == "zero" and self.alpha != 0:
            raise PreconditionError(f"{self.kind} takes alpha = 0, got {self.alpha}")
        if rule == "positive" and not self.alpha > 0:
            raise PreconditionError(f"{self.kind} needs alpha > 0, got {self.alpha}")
        if self.alpha < 0:
            raise PreconditionError(f"alpha must be >= 0, got {self.alpha}")
        if self.is_commutator != (self.symbol_b is not None):
            raise PreconditionError("a symbol b is required for commutators and only for them")

    @property
    def is_commutator(self) -> bool:
        return self.kind.startswith("commutator")

    @property
    def is_sublinear(self) -> bool:
        return self.kind in ("maximal", "frac_maximal", "envelope", "commutator_maximal")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "alpha": self.alpha, "has_symbol": self.symbol_b is not None}


def apply(spec: OperatorSpec, f: GridFunction, at=None):
    """Evaluate ``spec`` on the whole grid of ``f``, or at the points ``at``."""
    k, a, b = spec.kind, spec.alpha, spec.symbol_b
    if k == "maximal":
        return hl_maximal(f, spec.radii, at=at)
    if k == "frac_maximal":
        return frac_maximal(f, a, spec.radii, at=at)
    if k == "riesz_potential":
        return riesz_potential(f, a, at=at)
    if k == "pv_kernel":
        return pv_kernel(f, at=at)
    if k == "envelope":
        if at is not None:
            return envelope(f, a, at)
        if a == 0:
            raise PreconditionError("the alpha = 0 envelope is defined only at exterior points")
        return riesz_potential(abs(f), a)
    if k == "commutator_maximal":
        return commutator_maximal(b, f, a, spec.radii, at=at)
    if k == "commutator_riesz":
        return commutator_riesz(b, f, a, at=at)
    return commutator_pv(b, f, at=at)
