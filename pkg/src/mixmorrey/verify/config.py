"""Structured configuration (YAML or JSON) for the CLI.

Recognized top-level keys::

    grid:      {box: [[a, b], ...], resolution: N or [N1, N2]}
    function:  {kind: <generator>, ...params} or {file: path}
    exponents: {q: [..], p: [..]}            # p optional
    phi:       {phi1: {kind, lambda, log_exponent}, phi2: {...}}
    operator:  {kind, alpha, symbol: {kind: log_abs | heaviside | file, path}}
    corpus:    {generators: [...], dilations: [...], translations: [...]}
    seeds:     [int, ...]                    # random_bump_mixture seeds
    check:     theorem | lemma | lebesgue | domination | registry
    theorem_id, negative                     # registry mode
    output:    {path: report.json, format: json | csv}

Unknown keys are rejected so typos do not pass silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..errors import PreconditionError
from ..gridfn import GridFunction, load, sample
from ..phicond import PhiFamily
from .corpus import GENERATORS, CorpusSpec

KEYS = {
    "grid", "function", "exponents", "phi", "operator", "corpus", "seeds",
    "check", "theorem_id", "negative", "output",
}
CHECKS = ("theorem", "lemma", "lebesgue", "domination", "registry")


def load_config(path: str | Path) -> dict:
    """Parse a YAML or JSON file (JSON is a subset of YAML)."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise PreconditionError("configuration must be a mapping")
    unknown = set(data) - KEYS
    if unknown:
        raise PreconditionError(f"unknown configuration keys: {sorted(unknown)}")
    return data


def parse_grid(d: dict | None) -> tuple[tuple, object]:
    d = d or {}
    box = d.get("box", [[-4.0, 4.0]])
    box = tuple(tuple(float(v) for v in ab) for ab in np.atleast_2d(np.asarray(box, dtype=float)))
    return box, d.get("resolution", 16384)


def parse_function(d: dict, box, resolution) -> GridFunction:
    if "file" in d:
        return load(d["file"])
    kind = d.get("kind")
    if kind not in GENERATORS:
        raise PreconditionError(f"unknown function kind {kind!r}; known: {sorted(GENERATORS)}")
    params = {k: v for k, v in d.items() if k != "kind"}
    try:
        gen = GENERATORS[kind](dim=len(box), **params)
    except TypeError as exc:
        raise PreconditionError(f"bad parameters for {kind!r}: {exc}") from None
    return sample(gen, box, resolution)


def parse_symbol(d: dict | None, box, resolution) -> GridFunction | None:
    if d is None:
        return None
    kind = d.get("kind", "log_abs")
    if kind == "log_abs":
        return sample(lambda *xs: np.log(np.abs(xs[0])), box, resolution)
    if kind == "heaviside":
        return sample(lambda *xs: (xs[0] > 0).astype(float), box, resolution)
    if kind == "file":
        return load(d["path"])
    raise PreconditionError(f"unknown symbol kind {kind!r}")


def parse_corpus(d: dict | None, box, resolution, seeds=None) -> CorpusSpec:
    d = dict(d or {})
    d.setdefault("box", [list(ab) for ab in box])
    d.setdefault("resolution", resolution)
    spec = CorpusSpec.from_dict(d)
    if seeds is not None:
        gens = [g for g in spec.generators if g["kind"] != "random_bump_mixture"]
        gens += [{"kind": "random_bump_mixture", "seed": int(s), "count": 3 + int(s) % 3} for s in seeds]
        spec = CorpusSpec(gens, spec.dilations, spec.translations, spec.box, spec.resolution)
    return spec


@dataclass
class RunConfig:
    """A parsed ``verify`` configuration."""

    check: str
    box: tuple
    resolution: object
    q: list
    phi1: PhiFamily
    phi2: PhiFamily
    operator: dict
    corpus: CorpusSpec
    theorem_id: str = "custom"
    negative: bool = False
    output_path: str | None = None
    output_format: str = "json"
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        check = data.get("check", "theorem")
        if check not in CHECKS:
            raise PreconditionError(f"check must be one of {CHECKS}, got {check!r}")
        box, res = parse_grid(data.get("grid"))
        q = data.get("exponents", {}).get("q", [1.5] * len(box))
        phi = data.get("phi", {})
        out = data.get("output", {})
        return cls(
            check=check,
            box=box,
            resolution=res,
            q=list(np.atleast_1d(q).astype(float)),
            phi1=PhiFamily.from_dict(phi.get("phi1", {"lambda": 0.5})),
            phi2=PhiFamily.from_dict(phi.get("phi2", {"lambda": 0.5})),
            operator=dict(data.get("operator", {"kind": "maximal"})),
            corpus=parse_corpus(data.get("corpus"), box, res, data.get("seeds")),
            theorem_id=str(data.get("theorem_id", "custom")),
            negative=bool(data.get("negative", False)),
            output_path=out.get("path"),
            output_format=out.get("format", "json"),
            raw=data,
        )
