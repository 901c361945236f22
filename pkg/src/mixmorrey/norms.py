"""Mixed Lebesgue, Morrey-type and BMO functionals on grid functions.

Suprema over ``(x, r)`` are maxima over a :class:`~mixmorrey.balls.BallGrid`
and come back as :class:`SupResult` records carrying the argmax ball.
Morrey-type norms treat the function as zero outside its box and use every
ball of the grid; BMO functionals are averages and use only balls whose
stencil fits inside the box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .balls import (
    BallGrid,
    BallSums,
    ball_volume,
    chi_ball_norm,
    default_ball_grid,
    disk_rows,
    half_width,
    point_windows_1d,
)
from .errors import PreconditionError, SaturationError
from .gridfn import Ball, ExponentVector, GridFunction, as_exponents, ball_mask, restrict

#: Chunk size (elements) for gathered BMO windows.
_GATHER = 1 << 22


@dataclass(frozen=True)
class SupResult:
    """Value of a sup-over-balls functional with its maximizing ball."""

    value: float
    ball: Ball | None
    name: str
    params: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.value)

    def record(self) -> dict[str, Any]:
        return {
            "functional": self.name,
            "params": self.params,
            "value": self.value,
            "argmax_ball": None
            if self.ball is None
            else {"center": list(self.ball.center), "radius": self.ball.radius},
        }


def _argmax_result(vals: np.ndarray, grid: BallGrid, f: GridFunction, name, params) -> SupResult:
    finite = np.where(np.isnan(vals), -np.inf, vals)
    if finite.size == 0 or not np.any(np.isfinite(finite)):
        return SupResult(0.0, None, name, params)
    k = int(np.argmax(finite))
    i, j = np.unravel_index(k, vals.shape)
    value = float(finite[i, j])
    if value <= 0.0:
        return SupResult(0.0, None, name, params)
    return SupResult(value, grid.ball(f, int(i), int(j)), name, params)


def mixed_norm(f: GridFunction, q) -> float:
    """Iterated norm: ``L^{q_1}`` over ``x_1`` first, then ``L^{q_2}`` over ``x_2``."""
    q = as_exponents(q, f.dim)
    a = np.abs(f.values)
    scale = float(a.max())
    if scale == 0.0:
        return 0.0
    a = a / scale
    for qk, hk in zip(q, f.widths):
        a = (np.sum(a**qk, axis=0) * hk) ** (1.0 / qk)
    out = scale * float(a)
    if not math.isfinite(out):
        raise SaturationError(f"mixed norm overflowed for exponents {q.entries} (scale {scale:g})")
    return out


def conjugate(q: ExponentVector) -> ExponentVector:
    return q.conjugate()


def local_mixed_norm(f: GridFunction, q, ball: Ball) -> float:
    return mixed_norm(restrict(f, ball), q)


@dataclass(frozen=True, eq=False)
class MorreyParams:
    """Exponents, phi function and ball grid of a generalized mixed Morrey norm.

    ``phi`` is any callable ``phi(x, r)`` broadcasting over center
    coordinates of shape ``(..., dim)`` and radii; a
    :class:`~mixmorrey.phicond.PhiFamily` qualifies.
    """

    q_vec: ExponentVector
    phi: Callable
    ball_grid: BallGrid | None = None

    def __post_init__(self) -> None:
        if self.ball_grid is not None:
            if self.ball_grid.n_centers == 0 or len(self.ball_grid.radii) == 0:
                raise PreconditionError("ball grid is empty")
            if np.any(self.ball_grid.radii <= 0):
                raise PreconditionError("ball radii must be positive")


def _ball_local_norms(f: GridFunction, q: ExponentVector, grid: BallGrid) -> np.ndarray:
    return BallSums(f).mixed_norms(np.abs(f.values), q.entries, grid)


def gen_mixed_morrey_norm(f: GridFunction, params: MorreyParams) -> SupResult:
    """``max phi(x,r)^-1 ||chi_B||^-1 ||f chi_B||`` over the ball grid."""
    q = as_exponents(params.q_vec, f.dim)
    grid = params.ball_grid or default_ball_grid(f)
    L = _ball_local_norms(f, q, grid)
    centers = grid.centers(f)
    phi = np.broadcast_to(params.phi(centers[:, None, :], grid.radii[None, :]), L.shape)
    if np.any(phi <= 0):
        raise PreconditionError("phi must be strictly positive on the ball grid")
    vals = L / (phi * chi_ball_norm(q.entries, grid.radii)[None, :])
    return _argmax_result(vals, grid, f, "gen_mixed_morrey", {"q": list(q.entries)})


def gen_morrey_norm(f: GridFunction, q: float, phi: Callable, ball_grid: BallGrid | None = None) -> SupResult:
    """Scalar-exponent generalized Morrey norm, normalized by ``|B|^{1/q}``."""
    q = float(q)
    grid = ball_grid or default_ball_grid(f)
    qv = ExponentVector((q,) * f.dim)
    L = _ball_local_norms(f, qv, grid)
    phi_v = np.broadcast_to(phi(grid.centers(f)[:, None, :], grid.radii[None, :]), L.shape)
    vals = L / (phi_v * ball_volume(f.dim, grid.radii)[None, :] ** (1.0 / q))
    return _argmax_result(vals, grid, f, "gen_morrey", {"q": q})


def mixed_morrey_norm(f: GridFunction, p: float, q, ball_grid: BallGrid | None = None) -> SupResult:
    """``max |B|^{1/p - (1/n) sum 1/q_i} ||f chi_B||_{L^q}``."""
    q = as_exponents(q, f.dim)
    n = f.dim
    if not (1.0 <= p < math.inf):
        raise PreconditionError(f"p must lie in [1, inf), got {p}")
    if n / p > q.reciprocal_sum + 1e-12:
        raise PreconditionError(
            f"mixed Morrey parameters need n/p <= sum 1/q_i: {n / p:g} > {q.reciprocal_sum:g}"
        )
    grid = ball_grid or default_ball_grid(f)
    L = _ball_local_norms(f, q, grid)
    w = ball_volume(n, grid.radii) ** (1.0 / p - q.reciprocal_sum / n)
    return _argmax_result(L * w[None, :], grid, f, "mixed_morrey", {"p": p, "q": list(q.entries)})


def normalization_factor(q, dim: int) -> float:
    """``||chi_B||_{L^q} / |B|^{(1/n) sum 1/q_i}`` (independent of the ball).

    Converts between the two Morrey normalizations; equals 1 in 1-D and for
    equal exponents.
    """
    q = as_exponents(q, dim)
    return float(chi_ball_norm(q.entries, 1.0) / ball_volume(dim, 1.0) ** (q.reciprocal_sum / dim))


# BMO ---------------------------------------------------------------------


def _stencil_2d(r: float, h1: float, h2: float):
    dj, m = disk_rows(r, h1, h2)
    di = np.concatenate([np.arange(-mm, mm + 1) for mm in m])
    djs = np.concatenate([np.full(2 * mm + 1, d) for d, mm in zip(dj, m)])
    starts = np.concatenate([[0], np.cumsum(2 * m + 1)[:-1]])
    return di, djs, starts, int(m.max()), int(dj[-1])


def _oscillations(b: GridFunction, grid: BallGrid, mode: str, q) -> np.ndarray:
    """Per-ball mean-oscillation functional; ``nan`` for inadmissible balls."""
    vals = b.values
    ci = grid.center_index
    M, R = grid.n_centers, len(grid.radii)
    out = np.full((M, R), np.nan)
    h = b.widths
    for k, r in enumerate(grid.radii):
        if b.dim == 1:
            m = half_width(r, h[0])
            n = b.resolution[0]
            ok = np.nonzero((ci[:, 0] - m >= 0) & (ci[:, 0] + m <= n - 1))[0]
            if ok.size == 0:
                continue
            view = np.lib.stride_tricks.sliding_window_view(vals, 2 * m + 1)
            step = max(1, _GATHER // (2 * m + 1))
            for s in range(0, ok.size, step):
                sel = ok[s : s + step]
                W = view[ci[sel, 0] - m]
                dev = np.abs(W - W.mean(axis=1, keepdims=True))
                out[sel, k] = _reduce_dev(dev, mode, q, None, h)
        else:
            di, dj, starts, mm, J = _stencil_2d(r, h[0], h[1])
            n1, n2 = b.resolution
            ok = np.nonzero(
                (ci[:, 0] - mm >= 0) & (ci[:, 0] + mm <= n1 - 1) & (ci[:, 1] - J >= 0) & (ci[:, 1] + J <= n2 - 1)
            )[0]
            step = max(1, _GATHER // di.size)
            for s in range(0, ok.size, step):
                sel = ok[s : s + step]
                W = vals[ci[sel, 0][:, None] + di[None, :], ci[sel, 1][:, None] + dj[None, :]]
                dev = np.abs(W - W.mean(axis=1, keepdims=True))
                out[sel, k] = _reduce_dev(dev, mode, q, starts, h)
    return out


def _reduce_dev(dev: np.ndarray, mode: str, q, starts, h) -> np.ndarray:
    if mode == "bmo":
        return dev.mean(axis=1)
    if mode == "bmo_q":
        return (dev**q).mean(axis=1) ** (1.0 / q)
    # mixed: iterated norm of the deviation over the ball, over the same for chi_B
    if starts is None:
        (q1,) = q
        return (dev**q1).mean(axis=1) ** (1.0 / q1)
    q1, q2 = q
    inner = np.add.reduceat(dev**q1, starts, axis=1) * h[0]
    counts = np.diff(np.concatenate([starts, [dev.shape[1]]]))
    num = ((inner ** (q2 / q1)).sum(axis=1) * h[1]) ** (1.0 / q2)
    den = (((counts * h[0]) ** (q2 / q1)).sum() * h[1]) ** (1.0 / q2)
    return num / den


def bmo_norm(b: GridFunction, ball_grid: BallGrid | None = None) -> SupResult:
    grid = ball_grid or default_ball_grid(b)
    return _argmax_result(_oscillations(b, grid, "bmo", None), grid, b, "bmo", {})


def bmo_q_norm(b: GridFunction, q: float, ball_grid: BallGrid | None = None) -> SupResult:
    if not q >= 1:
        raise PreconditionError(f"BMO^q needs q >= 1, got {q}")
    grid = ball_grid or default_ball_grid(b)
    return _argmax_result(_oscillations(b, grid, "bmo_q", float(q)), grid, b, "bmo_q", {"q": q})


def bmo_mixed_norm(b: GridFunction, q, ball_grid: BallGrid | None = None) -> SupResult:
    q = as_exponents(q, b.dim)
    if any(v <= 1 for v in q):
        raise PreconditionError("mixed BMO needs every q_i in (1, inf)")
    grid = ball_grid or default_ball_grid(b)
    vals = _oscillations(b, grid, "mixed", q.entries)
    return _argmax_result(vals, grid, b, "bmo_mixed", {"q": list(q.entries)})


def ball_average(b: GridFunction, x: Sequence[float], r: float) -> float:
    """Average of ``b`` over the cells whose center lies in ``B(x, r)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if b.dim == 1:
        lo, hi, _ = point_windows_1d(b, x[:1], np.array([r]))
        lo, hi = int(lo[0, 0]), int(hi[0, 0])
        if hi <= lo:
            raise PreconditionError(f"B({x[0]}, {r}) covers no cell center")
        return float(b.values[lo:hi].mean())
    mask = ball_mask(b, Ball(tuple(x), r))
    if not mask.any():
        raise PreconditionError(f"B({tuple(x)}, {r}) covers no cell center")
    return float(b.values[mask].mean())


def ball_average_gap(b: GridFunction, x: Sequence[float], r: float, t: float) -> float:
    """``|b_{B(x,r)} - b_{B(x,t)}|`` for ``0 < 2r < t``."""
    if not (0 < 2 * r < t):
        raise PreconditionError(f"need 0 < 2r < t, got r={r}, t={t}")
    return abs(ball_average(b, x, r) - ball_average(b, x, t))
