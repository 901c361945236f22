"""Sampled functions on uniform rectangular grids in one or two dimensions.

Samples live at cell centers, integrals use the midpoint rule and ball
membership is decided by cell center only.  Array axis ``k`` of
``GridFunction.values`` corresponds to the coordinate ``x_{k+1}``, so the
innermost integration of a mixed norm runs over axis 0.
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import EmptySupportError, InvalidGridError, PreconditionError

logger = logging.getLogger(__name__)

#: Relative shrink applied to every radius so that cell centers at distance
#: exactly ``r`` are consistently treated as outside the open ball.
BALL_SHRINK = 1.0 - 1e-10

MAX_DIM = 2


@dataclass(frozen=True)
class ExponentVector:
    """Per-axis integrability exponents, each in ``[1, inf)``."""

    entries: tuple[float, ...]

    def __post_init__(self) -> None:
        entries = tuple(float(q) for q in self.entries)
        if not entries:
            raise PreconditionError("exponent vector must be nonempty")
        for q in entries:
            if not math.isfinite(q) or q < 1.0:
                raise PreconditionError(f"exponent {q} outside [1, inf)")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i: int) -> float:
        return self.entries[i]

    @property
    def reciprocal_sum(self) -> float:
        """``sum(1/q_i)``, the homogeneity degree of the mixed norm."""
        return sum(1.0 / q for q in self.entries)

    def conjugate(self) -> "ExponentVector":
        if any(q <= 1.0 for q in self.entries):
            raise PreconditionError(
                f"conjugate of {self.entries} has an infinite entry (q_i = 1)"
            )
        return ExponentVector(tuple(q / (q - 1.0) for q in self.entries))


def as_exponents(q: ExponentVector | float | Sequence[float], dim: int) -> ExponentVector:
    """Coerce a scalar or sequence to an exponent vector of length ``dim``."""
    if isinstance(q, ExponentVector):
        vec = q
    elif np.isscalar(q):
        vec = ExponentVector((float(q),) * dim)
    else:
        vec = ExponentVector(tuple(q))
    if len(vec) != dim:
        raise PreconditionError(f"exponent vector {vec.entries} has length != dim {dim}")
    return vec


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise PreconditionError(f"ball radius must be positive, got {self.radius}")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples at the cell centers of a uniform grid over a box."""

    box: tuple[tuple[float, float], ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        box = tuple((float(a), float(b)) for a, b in self.box)
        values = np.array(self.values, dtype=np.float64)
        if not 1 <= len(box) <= MAX_DIM:
            raise InvalidGridError(f"dimension must be 1 or 2, got {len(box)}")
        if values.ndim != len(box):
            raise InvalidGridError(
                f"values have {values.ndim} axes but the box has {len(box)}"
            )
        for (a, b), n in zip(box, values.shape):
            if not (math.isfinite(a) and math.isfinite(b) and b > a):
                raise InvalidGridError(f"invalid interval [{a}, {b}]")
            if n < 2:
                raise InvalidGridError(f"every axis needs at least 2 cells, got {n}")
        if not np.all(np.isfinite(values)):
            bad = tuple(int(i) for i in np.argwhere(~np.isfinite(values))[0])
            raise InvalidGridError(f"non-finite sample at cell {bad}")
        values.setflags(write=False)
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return len(self.box)

    @property
    def resolution(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def widths(self) -> np.ndarray:
        """Cell width along each axis."""
        return np.array([(b - a) / n for (a, b), n in zip(self.box, self.resolution)])

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.widths))

    @property
    def diameter(self) -> float:
        return float(math.hypot(*[b - a for a, b in self.box]))

    def axis_centers(self, k: int) -> np.ndarray:
        a, _ = self.box[k]
        h = self.widths[k]
        return a + (np.arange(self.resolution[k]) + 0.5) * h

    def centers(self) -> list[np.ndarray]:
        """Coordinate arrays of all cell centers, ``indexing='ij'``."""
        return np.meshgrid(*[self.axis_centers(k) for k in range(self.dim)], indexing="ij")

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.box, values)

    def same_grid(self, other: "GridFunction") -> bool:
        return self.box == other.box and self.resolution == other.resolution

    def cell_index(self, point: Sequence[float]) -> tuple[int, ...]:
        """Index of the cell containing ``point`` (right-hand cell on boundaries)."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        idx = []
        for k in range(self.dim):
            a, _ = self.box[k]
            i = int(math.floor((point[k] - a) / self.widths[k]))
            idx.append(min(max(i, 0), self.resolution[k] - 1))
        return tuple(idx)

    def _check_same(self, other: "GridFunction") -> None:
        if not self.same_grid(other):
            raise PreconditionError("grid functions live on different grids")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check_same(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check_same(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check_same(other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def __abs__(self):
        return self.with_values(np.abs(self.values))


def _normalize_box(box, dim_hint: int | None = None) -> tuple[tuple[float, float], ...]:
    arr = np.asarray(box, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    return tuple((float(a), float(b)) for a, b in arr)


def _normalize_resolution(resolution, dim: int) -> tuple[int, ...]:
    if np.isscalar(resolution):
        return (int(resolution),) * dim
    res = tuple(int(n) for n in resolution)
    if len(res) != dim:
        raise InvalidGridError(f"resolution {res} does not match dimension {dim}")
    return res


def sample(
    expr: Callable[..., np.ndarray | float],
    box,
    resolution: int | Sequence[int],
) -> GridFunction:
    """Evaluate ``expr`` at every cell center.

    ``expr`` receives one coordinate array per axis (``indexing='ij'``) and
    should be vectorized; scalar-only callables are retried through
    ``np.vectorize``.
    """
    box = _normalize_box(box)
    res = _normalize_resolution(resolution, len(box))
    if not 1 <= len(box) <= MAX_DIM:
        raise InvalidGridError(f"dimension must be 1 or 2, got {len(box)}")
    for (a, b), n in zip(box, res):
        if not b > a or n < 2:
            raise InvalidGridError(f"invalid axis [{a}, {b}] with {n} cells")
    axes = [a + (np.arange(n) + 0.5) * (b - a) / n for (a, b), n in zip(box, res)]
    coords = np.meshgrid(*axes, indexing="ij")
    try:
        vals = np.asarray(expr(*coords), dtype=float)
    except (TypeError, ValueError):
        vals = np.asarray(np.vectorize(expr, otypes=[float])(*coords))
    vals = np.broadcast_to(vals, res).astype(float)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = tuple(int(j) for j in np.argwhere(bad)[0])
        center = tuple(float(c[i]) for c in coords)
        raise InvalidGridError(f"expression is non-finite at cell {i} (center {center})")
    return GridFunction(box, vals)


def integrate(f: GridFunction) -> float:
    """Midpoint-rule integral over the box."""
    return float(np.sum(f.values) * f.cell_volume)


def ball_mask(f: GridFunction, ball: Ball) -> np.ndarray:
    """Boolean mask of cells whose center lies in the open ball."""
    if len(ball.center) != f.dim:
        raise PreconditionError("ball and grid dimensions differ")
    d2 = sum((c - x0) ** 2 for c, x0 in zip(f.centers(), ball.center))
    return d2 < (ball.radius * BALL_SHRINK) ** 2


def restrict(f: GridFunction, ball: Ball) -> GridFunction:
    """``f`` times the indicator of ``ball`` (by cell center)."""
    mask = ball_mask(f, ball)
    if not mask.any():
        raise EmptySupportError(
            f"no cell center of the grid lies in B({ball.center}, {ball.radius})"
        )
    return f.with_values(np.where(mask, f.values, 0.0))


def dilate_translate(f: GridFunction, lam: float, tau: Sequence[float] | float = 0.0) -> GridFunction:
    """Return ``x -> f(lam * (x - tau))`` on the transformed box.

    The samples are carried over unchanged; only the box moves, so the
    resolution relative to the function's features is preserved.
    """
    if not (np.isfinite(lam) and lam > 0):
        raise PreconditionError(f"dilation factor must be finite and positive, got {lam}")
    tau = np.broadcast_to(np.asarray(tau, dtype=float), (f.dim,))
    box = tuple((a / lam + t, b / lam + t) for (a, b), t in zip(f.box, tau))
    return GridFunction(box, f.values)


def refinement_diagnostic(expr, box, resolutions: Sequence[int]) -> list[float]:
    """Successive differences of midpoint integrals under grid refinement."""
    vals = [integrate(sample(expr, box, n)) for n in resolutions]
    diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
    for n, d in zip(resolutions[1:], diffs):
        logger.info("refinement N=%d: |delta integral| = %.3e", n, d)
    return diffs


# Serialization: little-endian, C (row-major) order of ``values``.
#   magic  b"GFN1"
#   uint32 dim
#   dim x (float64 a, float64 b, uint64 N)
#   prod(N) x float64 samples
_MAGIC = b"GFN1"


def to_bytes(f: GridFunction) -> bytes:
    parts = [_MAGIC, struct.pack("<I", f.dim)]
    for (a, b), n in zip(f.box, f.resolution):
        parts.append(struct.pack("<ddQ", a, b, n))
    parts.append(np.ascontiguousarray(f.values, dtype="<f8").tobytes())
    return b"".join(parts)


def from_bytes(data: bytes) -> GridFunction:
    if data[:4] != _MAGIC:
        raise InvalidGridError("not a grid function file (bad magic)")
    (dim,) = struct.unpack_from("<I", data, 4)
    if not 1 <= dim <= MAX_DIM:
        raise InvalidGridError(f"unsupported dimension {dim}")
    off = 8
    box, res = [], []
    for _ in range(dim):
        a, b, n = struct.unpack_from("<ddQ", data, off)
        off += 24
        box.append((a, b))
        res.append(int(n))
    count = int(np.prod(res))
    if len(data) - off != 8 * count:
        raise InvalidGridError("sample payload length does not match the header")
    values = np.frombuffer(data, dtype="<f8", count=count, offset=off).reshape(res)
    return GridFunction(tuple(box), values.astype(np.float64))


def save(f: GridFunction, path: str | Path) -> None:
    Path(path).write_bytes(to_bytes(f))


def load(path: str | Path) -> GridFunction:
    return from_bytes(Path(path).read_bytes())
