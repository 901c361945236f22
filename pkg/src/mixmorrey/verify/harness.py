"""Boundedness checks over a corpus and a dilation sweep.

"Bounded" is operationalized as: the ratio ``||T f||_target / ||f||_source``
(commutators additionally divided by ``||b||_BMO``) has a finite maximum
over corpus x transforms, and for every corpus function its max/min over
the transforms stays within ``MAX_SPREAD``.  Unboundedness shows up as
sustained monotone growth of the ratio along the dilation sweep.

Every transform moves the symbol ``b`` together with ``f``, so the pair
``(b, f)`` is dilated as a unit and ``||b||_BMO`` is taken once on the base
grid.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from ..balls import BallSums, BallGrid, default_ball_grid
from ..errors import CorpusError, PreconditionError
from ..gridfn import ExponentVector, GridFunction, as_exponents, dilate_translate
from ..norms import MorreyParams, bmo_norm, gen_mixed_morrey_norm, mixed_norm
from ..operators import OperatorSpec, apply
from ..phicond import PhiFamily, zygmund_condition
from ..sweep import monotone_growth
from .corpus import CorpusSpec, check_inside, transformed
from .report import EXPECTED_FAIL, FAIL, INCONCLUSIVE, PASS, VerificationReport

logger = logging.getLogger(__name__)

MAX_SPREAD = 10.0
MIN_GROWTH = 10.0
THREADS_ENV = "MIXMORREY_THREADS"
#: Ball-grid center stride used for ``||b||_BMO`` on fine 1-D grids.
BMO_STRIDE = 16


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _pmap(fn: Callable, items: Sequence) -> list:
    """Order-preserving map, threaded when ``MIXMORREY_THREADS`` > 1."""
    n = thread_count()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def target_exponents(q: ExponentVector, alpha: float, dim: int) -> ExponentVector:
    """``1/p_i = 1/q_i - alpha/n``; rejects ``1/q_i <= alpha/n``."""
    if alpha == 0:
        return q
    inv = [1.0 / qi - alpha / dim for qi in q]
    if any(v <= 0 for v in inv):
        raise PreconditionError(f"alpha/n = {alpha / dim:g} must be < 1/q_i for every i, q = {q.entries}")
    return ExponentVector(tuple(1.0 / v for v in inv))


@dataclass(frozen=True, eq=False)
class OperatorConfig:
    """Operator kind and order, with the symbol ``b`` on the corpus base grid."""

    kind: str
    alpha: float = 0.0
    symbol: GridFunction | None = None
    radii_per_decade: int = 32

    @property
    def is_commutator(self) -> bool:
        return self.kind.startswith("commutator")

    @property
    def fractional(self) -> bool:
        return self.alpha > 0

    def spec_for(self, f: GridFunction, b: GridFunction | None) -> OperatorSpec:
        return OperatorSpec(self.kind, self.alpha, b, None)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "alpha": self.alpha, "has_symbol": self.symbol is not None}


def _symbol_bmo(b: GridFunction) -> float:
    stride = BMO_STRIDE if b.dim == 1 and b.resolution[0] > 4096 else 4
    value = bmo_norm(b, default_ball_grid(b, stride=stride)).value
    if not value > 0:
        raise PreconditionError("the symbol b has zero BMO norm; commutator ratios are undefined")
    return value


def _verdict(cond_finite: bool, rows: list[dict], per_function: list[list[float]]):
    """PASS / FAIL / EXPECTED-FAIL / INCONCLUSIVE from the ratio table."""
    ratios = np.array([r["ratio"] for r in rows], dtype=float)
    fitted = float(np.max(ratios)) if ratios.size else math.nan
    spreads, growths = [], []
    for seq in per_function:
        s = np.asarray(seq, dtype=float)
        spreads.append(float(s.max() / s.min()) if np.all(s > 0) and np.all(np.isfinite(s)) else math.inf)
        growths.append(monotone_growth(s, MIN_GROWTH))
    spread = max(spreads) if spreads else math.nan
    if cond_finite:
        ok = math.isfinite(fitted) and spread <= MAX_SPREAD
        return (PASS if ok else FAIL), fitted, spread, growths
    all_grow = bool(growths) and all(flag for flag, _ in growths)
    return (EXPECTED_FAIL if all_grow else INCONCLUSIVE), fitted, spread, growths


def run_theorem_check(
    theorem_id: str,
    operator: OperatorConfig,
    q,
    phi1: PhiFamily,
    phi2: PhiFamily,
    corpus: CorpusSpec,
    ball_stride: int = 4,
) -> VerificationReport:
    """Morrey-to-Morrey ratios over corpus x dilations, checked against the phi condition."""
    dim = corpus.dim
    q = as_exponents(q, dim)
    corpus.check_exponents(q.entries)
    p = target_exponents(q, operator.alpha, dim)
    if operator.is_commutator and operator.symbol is None:
        raise PreconditionError("commutator checks need a symbol b")
    cond = zygmund_condition(
        phi1, phi2, q,
        p=p if operator.fractional else None,
        log_factor=operator.is_commutator,
    )
    base = corpus.base_functions()
    names = corpus.names()
    b0 = operator.symbol
    if b0 is not None and not b0.same_grid(base[0]):
        raise PreconditionError("the symbol must be sampled on the corpus base grid")
    bmo = _symbol_bmo(b0) if b0 is not None else 1.0
    transforms = corpus.transforms()
    notes: list[str] = []
    if cond.vacuous:
        notes.append("phi1 has a vanishing ess-inf tail: the condition holds vacuously")

    def job(item):
        i, (lam, tau) = item
        f = transformed(base[i], lam, tau, names[i])
        b = dilate_translate(b0, lam, tau) if b0 is not None else None
        grid = default_ball_grid(f, stride=ball_stride, per_decade=operator.radii_per_decade)
        src = gen_mixed_morrey_norm(f, MorreyParams(q, phi1, grid)).value
        if src == 0:
            return None
        Tf = apply(operator.spec_for(f, b), f)
        tgt = gen_mixed_morrey_norm(Tf, MorreyParams(p, phi2, grid)).value
        return {
            "function": names[i],
            "transform": CorpusSpec.transform_label(lam, tau),
            "source": src,
            "target": tgt,
            "ratio": tgt / (src * bmo),
        }

    items = [(i, t) for i in range(len(base)) for t in transforms]
    results = _pmap(job, items)
    rows, per_function = [], []
    for i in range(len(base)):
        chunk = results[i * len(transforms) : (i + 1) * len(transforms)]
        if any(r is None for r in chunk):
            notes.append(f"{names[i]} vanishes on the grid; skipped")
            continue
        rows.extend(chunk)
        per_function.append([r["ratio"] for r in chunk])
    if not rows:
        raise CorpusError("every corpus function vanished; nothing to check")
    verdict, fitted, spread, growths = _verdict(cond.finite, rows, per_function)
    return VerificationReport(
        theorem_id=theorem_id,
        operator=operator.to_dict(),
        exponents={"q": list(q.entries), "p": list(p.entries)},
        phi={"phi1": phi1.to_dict(), "phi2": phi2.to_dict()},
        rows=rows,
        fitted_constant=fitted,
        spread=spread,
        verdict=verdict,
        environment=_environment(corpus, ball_stride, operator),
        notes=notes,
        extra={
            "condition": cond.to_dict(),
            "bmo_b": bmo if b0 is not None else None,
            "growth": [g for _, g in growths],
            "monotone_growth": [bool(flag) for flag, _ in growths],
        },
    )


def _environment(corpus: CorpusSpec, stride: int, operator: OperatorConfig) -> dict:
    return {
        "corpus": corpus.to_dict(),
        "ball_grid": {"stride": stride, "radii_per_decade": operator.radii_per_decade},
        "bmo_stride": BMO_STRIDE,
    }


def run_lebesgue_check(
    check_id: str,
    operator: OperatorConfig,
    q,
    corpus: CorpusSpec,
) -> VerificationReport:
    """Mixed-Lebesgue ratios ``||T f||_p / ||f||_q`` over corpus x dilations."""
    dim = corpus.dim
    q = as_exponents(q, dim)
    corpus.check_exponents(q.entries)
    p = target_exponents(q, operator.alpha, dim)
    base = corpus.base_functions()
    names = corpus.names()
    b0 = operator.symbol
    bmo = _symbol_bmo(b0) if b0 is not None else 1.0
    transforms = corpus.transforms()

    def job(item):
        i, (lam, tau) = item
        f = transformed(base[i], lam, tau, names[i])
        b = dilate_translate(b0, lam, tau) if b0 is not None else None
        src = mixed_norm(f, q)
        if src == 0:
            return None
        tgt = mixed_norm(apply(operator.spec_for(f, b), f), p)
        return {"function": names[i], "transform": CorpusSpec.transform_label(lam, tau),
                "source": src, "target": tgt, "ratio": tgt / (src * bmo)}

    results = _pmap(job, [(i, t) for i in range(len(base)) for t in transforms])
    rows, per_function, notes = [], [], []
    for i in range(len(base)):
        chunk = results[i * len(transforms) : (i + 1) * len(transforms)]
        if any(r is None for r in chunk):
            notes.append(f"{names[i]} vanishes on the grid; skipped")
            continue
        rows.extend(chunk)
        per_function.append([r["ratio"] for r in chunk])
    verdict, fitted, spread, _ = _verdict(True, rows, per_function)
    all_ratios = [r["ratio"] for r in rows]
    return VerificationReport(
        theorem_id=check_id,
        operator=operator.to_dict(),
        exponents={"q": list(q.entries), "p": list(p.entries)},
        phi={},
        rows=rows,
        fitted_constant=fitted,
        spread=spread,
        verdict=verdict,
        environment=_environment(corpus, 4, operator),
        notes=notes,
        extra={"corpus_spread": max(all_ratios) / min(all_ratios), "bmo_b": bmo if b0 is not None else None},
    )


def _trapezoid_log(y: np.ndarray, t: np.ndarray, axis: int = -1) -> np.ndarray:
    return trapezoid(y * t, np.log(t), axis=axis)


def run_lemma_check(
    lemma_id: str,
    operator: OperatorConfig,
    q,
    corpus: CorpusSpec,
    centers: int = 8,
    r_per_decade: int = 4,
    t_per_decade: int = 64,
) -> VerificationReport:
    """Local on-ball estimate ``||T f||_{L^p(B(x0,r))} <= C r^{sum 1/p} int_{2r}^R ...``.

    The right-hand side is ``r^{s} int_{2r}^{R} L(t) t^{-1-s} ||f||_{L^q(B(x0,t))} dt``
    with ``s = sum 1/p_i``, ``L = 1 + ln(t/r)`` for commutators (else 1) and
    ``R`` the box diameter.  Commutator left sides are divided by
    ``||b||_BMO``.  Rows are (function, ball) pairs.
    """
    dim = corpus.dim
    q = as_exponents(q, dim)
    corpus.check_exponents(q.entries)
    p = target_exponents(q, operator.alpha, dim)
    sig = p.reciprocal_sum
    base = corpus.base_functions()
    names = corpus.names()
    b0 = operator.symbol
    bmo = _symbol_bmo(b0) if b0 is not None else 1.0
    f0 = base[0]
    h = float(np.min(f0.widths))
    R = f0.diameter
    axes = [np.linspace(0, n - 1, centers + 2)[1:-1].round().astype(int) for n in f0.resolution]
    mesh = np.meshgrid(*axes, indexing="ij")
    cidx = np.stack([m.ravel() for m in mesh], axis=1)
    nr = int(math.floor(r_per_decade * math.log10(R / 4 / (4 * h))))
    rs = 4 * h * (R / 4 / (4 * h)) ** (np.arange(nr + 1) / max(nr, 1))
    nt = int(math.ceil(t_per_decade * math.log10(R / (2 * rs[0]))))
    ts = 2 * rs[0] * (R / (2 * rs[0])) ** (np.arange(nt + 1) / nt)
    lhs_grid = BallGrid(cidx, rs)
    rhs_grid = BallGrid(cidx, ts)
    log_factor = operator.is_commutator

    def job(i):
        f = base[i]
        if not np.any(f.values):
            return None
        Tf = apply(operator.spec_for(f, b0), f)
        lhs = BallSums(Tf).mixed_norms(np.abs(Tf.values), p.entries, lhs_grid) / bmo
        loc = BallSums(f).mixed_norms(np.abs(f.values), q.entries, rhs_grid)  # (M, T)
        out = []
        centers_xy = lhs_grid.centers(f)
        for k, r in enumerate(rs):
            sel = ts >= 2 * r * (1 - 1e-12)
            tt = ts[sel]
            L = 1.0 + np.log(tt / r) if log_factor else np.ones_like(tt)
            rhs = r**sig * _trapezoid_log(L[None, :] * tt[None, :] ** (-1 - sig) * loc[:, sel], tt[None, :])
            for m in range(len(cidx)):
                if rhs[m] > 0:
                    out.append({
                        "function": names[i],
                        "transform": f"x0={tuple(round(float(c), 6) for c in centers_xy[m])},r={r:.6g}",
                        "source": float(rhs[m]),
                        "target": float(lhs[m, k]),
                        "ratio": float(lhs[m, k] / rhs[m]),
                    })
        return out

    results = _pmap(job, range(len(base)))
    rows, notes, maxima = [], [], []
    for i, res in enumerate(results):
        if not res:
            notes.append(f"{names[i]}: both sides vanish; skipped")
            continue
        rows.extend(res)
        maxima.append(max(r["ratio"] for r in res))
    if not rows:
        raise CorpusError("every corpus function vanished; nothing to check")
    fitted = max(maxima)
    spread = fitted / min(maxima) if min(maxima) > 0 else math.inf
    verdict = PASS if math.isfinite(fitted) else FAIL
    return VerificationReport(
        theorem_id=lemma_id,
        operator=operator.to_dict(),
        exponents={"q": list(q.entries), "p": list(p.entries)},
        phi={},
        rows=rows,
        fitted_constant=fitted,
        spread=spread,
        verdict=verdict,
        environment={"corpus": corpus.to_dict(), "R": R, "centers": centers,
                     "r_per_decade": r_per_decade, "t_per_decade": t_per_decade},
        notes=notes,
        extra={"bmo_b": bmo if b0 is not None else None, "per_function_max": maxima},
    )


def run_domination_check(check_id: str, alpha: float, corpus: CorpusSpec) -> VerificationReport:
    """Pointwise ``M_alpha f <= C I_alpha |f|``: per (function, transform) the max quotient.

    Both sides are evaluated on the full grid; cells where ``I_alpha |f|``
    vanishes (it never does for nonzero ``f``) would be skipped.
    """
    base = corpus.base_functions()
    names = corpus.names()
    m_spec = OperatorSpec("frac_maximal", alpha, None, None)
    i_spec = OperatorSpec("riesz_potential", alpha, None, None)

    def job(item):
        i, (lam, tau) = item
        f = transformed(base[i], lam, tau, names[i])
        if not np.any(f.values):
            return None
        absf = f.with_values(np.abs(f.values))
        Mf = apply(m_spec, f).values
        If = apply(i_spec, absf).values
        pos = If > 0
        quot = float(np.max(Mf[pos] / If[pos]))
        return {"function": names[i], "transform": CorpusSpec.transform_label(lam, tau),
                "source": float(np.max(If)), "target": float(np.max(Mf)), "ratio": quot}

    transforms = corpus.transforms()
    results = _pmap(job, [(i, t) for i in range(len(base)) for t in transforms])
    rows, per_function, notes = [], [], []
    for i in range(len(base)):
        chunk = results[i * len(transforms) : (i + 1) * len(transforms)]
        if any(r is None for r in chunk):
            notes.append(f"{names[i]} vanishes on the grid; skipped")
            continue
        rows.extend(chunk)
        per_function.append([r["ratio"] for r in chunk])
    if not rows:
        raise CorpusError("every corpus function vanished; nothing to check")
    verdict, fitted, spread, _ = _verdict(True, rows, per_function)
    return VerificationReport(
        theorem_id=check_id,
        operator={"kind": "frac_maximal_over_riesz", "alpha": alpha, "has_symbol": False},
        exponents={},
        phi={},
        rows=rows,
        fitted_constant=fitted,
        spread=spread,
        verdict=verdict,
        environment={"corpus": corpus.to_dict()},
        notes=notes,
        extra={},
    )
