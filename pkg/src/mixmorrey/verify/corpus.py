"""Test-function corpora for the boundedness checks.

A corpus is a list of generator declarations plus a set of transforms
(dilations and translations).  Generators are compactly supported or decay
far below the sampling tolerance before the box edge; anything that still
touches the boundary after a transform is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import CorpusError, PreconditionError
from ..gridfn import GridFunction, dilate_translate, sample

#: Relative size at the box boundary above which a function "touches" it.
EDGE_TOL = 1e-12

DEFAULT_DILATIONS = (1e-2, 1e-1, 1.0, 1e1, 1e2)


def _point(c, dim: int) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.size == 1 and dim > 1:
        c = np.concatenate([c, np.zeros(dim - 1)])
    if c.size != dim:
        raise PreconditionError(f"center {c} does not match dimension {dim}")
    return c


def _dist(xs, c) -> np.ndarray:
    return np.sqrt(sum((x - ck) ** 2 for x, ck in zip(xs, c)))


def indicator_ball(center, radius: float, dim: int = 1) -> Callable:
    c = _point(center, dim)
    return lambda *xs: (_dist(xs, c) < radius).astype(float)


def indicator_cube(center, half_side: float, dim: int = 1) -> Callable:
    c = _point(center, dim)
    return lambda *xs: np.all([np.abs(x - ck) < half_side for x, ck in zip(xs, c)], axis=0).astype(float)


def gaussian_bump(center, width: float, dim: int = 1) -> Callable:
    c = _point(center, dim)
    return lambda *xs: np.exp(-_dist(xs, c) ** 2 / (2.0 * width**2))


def power_singularity(beta: float, radius: float = 1.0, center=0.0, dim: int = 1) -> Callable:
    """``|x - c|^{-beta}`` on ``B(c, radius)``; cell centers must avoid ``c``."""
    c = _point(center, dim)

    def expr(*xs):
        d = _dist(xs, c)
        with np.errstate(divide="ignore"):
            return np.where(d < radius, d ** (-beta), 0.0)

    return expr


def random_bump_mixture(seed: int, count: int, dim: int = 1) -> Callable:
    """Sum of ``count`` Gaussians with centers, widths and amplitudes drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-1.0, 1.0, size=(count, dim))
    widths = rng.uniform(0.05, 0.3, size=count)
    amps = rng.uniform(0.5, 1.5, size=count)

    def expr(*xs):
        out = np.zeros(np.shape(xs[0]))
        for c, w, a in zip(centers, widths, amps):
            out = out + a * np.exp(-_dist(xs, c) ** 2 / (2.0 * w**2))
        return out

    return expr


GENERATORS = {
    "indicator_ball": indicator_ball,
    "indicator_cube": indicator_cube,
    "gaussian_bump": gaussian_bump,
    "power_singularity": power_singularity,
    "random_bump_mixture": random_bump_mixture,
}


def default_generators() -> list[dict]:
    """The standard 16-function corpus."""
    gens: list[dict] = []
    for c, r in ((0.0, 1.0), (0.5, 0.25), (-1.0, 0.5)):
        gens.append({"kind": "indicator_ball", "center": c, "radius": r})
    for c, s in ((0.3, 0.7), (-0.2, 0.1)):
        gens.append({"kind": "indicator_cube", "center": c, "half_side": s})
    for c, w in ((0.0, 0.2), (0.7, 0.1), (-0.5, 0.4)):
        gens.append({"kind": "gaussian_bump", "center": c, "width": w})
    for b in (0.2, 0.4, 0.6):
        gens.append({"kind": "power_singularity", "beta": b})
    for seed in range(5):
        gens.append({"kind": "random_bump_mixture", "seed": seed, "count": 3 + seed % 3})
    return gens


def _label(g: dict) -> str:
    parts = [f"{k}={g[k]}" for k in sorted(g) if k != "kind"]
    return f"{g['kind']}({','.join(parts)})"


@dataclass
class CorpusSpec:
    """Generators, transforms and the base grid they are sampled on."""

    generators: list[dict] = field(default_factory=default_generators)
    dilations: Sequence[float] = DEFAULT_DILATIONS
    translations: Sequence[float] = (0.0,)
    box: Sequence = ((-4.0, 4.0),)
    resolution: int | Sequence[int] = 16384

    @property
    def dim(self) -> int:
        return len(self.box)

    def __post_init__(self) -> None:
        self.box = tuple(tuple(float(v) for v in ab) for ab in np.atleast_2d(np.asarray(self.box, dtype=float)))
        if not self.generators:
            raise CorpusError("empty corpus")
        if any(not lam > 0 for lam in self.dilations):
            raise CorpusError("dilations must be positive")
        for g in self.generators:
            if g.get("kind") not in GENERATORS:
                raise CorpusError(f"unknown generator {g.get('kind')!r}")
            if g["kind"] == "power_singularity" and not g["beta"] > 0:
                raise CorpusError("power singularity needs beta > 0")

    def check_exponents(self, q: Sequence[float]) -> None:
        """``beta < n / max q_i`` so each power singularity lies in ``L^q_loc``."""
        bound = self.dim / max(q)
        for g in self.generators:
            if g["kind"] == "power_singularity" and not g["beta"] < bound:
                raise CorpusError(f"beta={g['beta']} >= n/max q = {bound:g}: not locally in L^q")

    def names(self) -> list[str]:
        return [_label(g) for g in self.generators]

    def transforms(self) -> list[tuple[float, float]]:
        return [(float(lam), float(tau)) for lam in self.dilations for tau in self.translations]

    @staticmethod
    def transform_label(lam: float, tau: float) -> str:
        return f"lam={lam:g},tau={tau:g}"

    def base_functions(self) -> list[GridFunction]:
        out = []
        for g in self.generators:
            params = {k: v for k, v in g.items() if k != "kind"}
            expr = GENERATORS[g["kind"]](dim=self.dim, **params)
            f = sample(expr, self.box, self.resolution)
            check_inside(f, _label(g))
            out.append(f)
        return out

    def to_dict(self) -> dict:
        return {
            "generators": self.generators,
            "dilations": list(self.dilations),
            "translations": list(self.translations),
            "box": [list(ab) for ab in self.box],
            "resolution": self.resolution if np.isscalar(self.resolution) else list(self.resolution),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusSpec":
        kw = {}
        if "generators" in d:
            kw["generators"] = list(d["generators"])
        for key in ("dilations", "translations"):
            if key in d:
                kw[key] = tuple(float(v) for v in d[key])
        if "box" in d:
            kw["box"] = d["box"]
        if "resolution" in d:
            kw["resolution"] = d["resolution"]
        return cls(**kw)


def check_inside(f: GridFunction, name: str = "function") -> None:
    """Reject functions that do not vanish (to ``EDGE_TOL``) on the boundary cells."""
    v = np.abs(f.values)
    peak = float(v.max())
    if peak == 0.0:
        return
    edge = [v[0], v[-1]] if f.dim == 1 else [v[0, :], v[-1, :], v[:, 0], v[:, -1]]
    if max(float(np.max(e)) for e in edge) > EDGE_TOL * peak:
        raise CorpusError(f"{name} touches the box boundary; enlarge the box")


def transformed(f: GridFunction, lam: float, tau: float, name: str = "function") -> GridFunction:
    g = dilate_translate(f, lam, tau)
    check_inside(g, name)
    return g
