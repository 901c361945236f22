"""Weighted Hardy operators on the half-line and their supremum conditions.

Functions live on a geometric grid of ``(0, inf)`` truncated to
``[t_min, t_max]``.  Integrals are trapezoid sums in ``u = ln s`` and, when
the integrand's factors are declared power laws ``c * s**e``, the part
beyond ``t_max`` is added in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import PreconditionError
from .sweep import detect_divergence, monotone_growth
from .verify.report import EXPECTED_FAIL, FAIL, PASS, VerificationReport

T_MIN, T_MAX = 1e-3, 1e3
PER_DECADE = 128


def log_grid(t_min: float = T_MIN, t_max: float = T_MAX, per_decade: int = PER_DECADE) -> np.ndarray:
    n = int(round(per_decade * math.log10(t_max / t_min)))
    return t_min * (t_max / t_min) ** (np.arange(n + 1) / n)


@dataclass(frozen=True, eq=False)
class HalfLineFunction:
    """Samples on a strictly increasing positive grid, optionally a declared power law.

    ``power = (c, e)`` declares ``f(s) = c * s**e`` for every ``s``, which
    lets tails beyond the grid be integrated exactly.
    """

    t: np.ndarray
    values: np.ndarray
    power: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise PreconditionError("half-line grid needs at least two points")
        if t[0] <= 0 or np.any(np.diff(t) <= 0):
            raise PreconditionError("half-line grid must be positive and strictly increasing")
        if v.shape != t.shape or not np.all(np.isfinite(v)):
            raise PreconditionError("values must be finite and match the grid")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @property
    def t_min(self) -> float:
        return float(self.t[0])

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def on(self, t: np.ndarray) -> "HalfLineFunction":
        """Same function resampled on ``t`` (exact for declared powers)."""
        if self.power is not None:
            c, e = self.power
            return HalfLineFunction(t, c * t**e, self.power)
        return HalfLineFunction(t, np.interp(np.log(t), np.log(self.t), self.values), None)

    def __mul__(self, other: "HalfLineFunction") -> "HalfLineFunction":
        _same_grid(self, other)
        power = None
        if self.power is not None and other.power is not None:
            power = (self.power[0] * other.power[0], self.power[1] + other.power[1])
        return HalfLineFunction(self.t, self.values * other.values, power)


def power_function(exponent: float, coef: float = 1.0, t: np.ndarray | None = None) -> HalfLineFunction:
    """``coef * s**exponent`` on ``t`` (default :func:`log_grid`)."""
    t = log_grid() if t is None else np.asarray(t, dtype=float)
    return HalfLineFunction(t, coef * t**exponent, (float(coef), float(exponent)))


def sampled_function(t, values) -> HalfLineFunction:
    return HalfLineFunction(t, values, None)


def _same_grid(a: HalfLineFunction, b: HalfLineFunction) -> None:
    if a.t.shape != b.t.shape or not np.array_equal(a.t, b.t):
        raise PreconditionError("half-line functions live on different grids")


def _tail(c: float, e: float, T: float, t: np.ndarray, log_factor: bool) -> np.ndarray:
    """``int_T^inf (1 + ln(s/t))^[log] c s^e ds``; rejects non-integrable tails."""
    beta = -(e + 1.0)
    if beta <= 0:
        raise PreconditionError(
            f"integrand ~ s^{e:g} is not integrable at infinity (need exponent < -1)"
        )
    base = c * T ** (-beta) / beta
    if not log_factor:
        return np.full_like(t, base)
    return base * (1.0 + np.log(T / t)) + c * T ** (-beta) / beta**2


def _tail_integrals(f: HalfLineFunction, t, log_factor: bool) -> np.ndarray:
    """``int_t^inf (1 + ln(s/t))^[log] f(s) ds`` for every ``t`` in the grid range."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < f.t_min * (1 - 1e-12)) or np.any(t > f.t_max * (1 + 1e-12)):
        raise PreconditionError(f"t must lie in [{f.t_min:g}, {f.t_max:g}]")
    u = np.log(f.t)
    y = f.values * f.t  # ds = s du
    # right-to-left cumulative integrals of y and y * ln s
    c0 = cumulative_trapezoid(y[::-1], -u[::-1], initial=0.0)[::-1]
    c1 = cumulative_trapezoid((y * u)[::-1], -u[::-1], initial=0.0)[::-1]
    lt = np.log(t)
    I0 = np.interp(lt, u, c0)
    out = I0.copy()
    if log_factor:
        I1 = np.interp(lt, u, c1)
        out = (1.0 - lt) * I0 + I1
    if f.power is not None:
        c, e = f.power
        out = out + _tail(c, e, f.t_max, t, log_factor)
    return out


def hardy_Hw(g: HalfLineFunction, w: HalfLineFunction, t):
    """``H_w g(t) = int_t^inf g(s) w(s) ds``."""
    out = _tail_integrals(g * w, t, log_factor=False)
    return float(out[0]) if np.ndim(t) == 0 else out


def hardy_Hw_star(g: HalfLineFunction, w: HalfLineFunction, t):
    """``int_t^inf (1 + ln(s/t)) g(s) w(s) ds``."""
    out = _tail_integrals(g * w, t, log_factor=True)
    return float(out[0]) if np.ndim(t) == 0 else out


def running_sup_right(v: np.ndarray) -> np.ndarray:
    """``max_{j >= i} v_j``: the grid stand-in for ``ess sup`` over ``(s, inf)``."""
    return np.maximum.accumulate(np.asarray(v, dtype=float)[::-1])[::-1]


@dataclass
class HardyCondition:
    value: float
    argmax_t: float
    t: np.ndarray
    profile: np.ndarray
    diverged: bool

    def __float__(self) -> float:
        return self.value


def _condition(v1, v2, w, log_factor: bool) -> HardyCondition:
    _same_grid(v1, v2)
    _same_grid(v1, w)
    if np.any(v1.values <= 0):
        raise PreconditionError("v1 must be positive on the grid")
    t = v1.t
    if v1.power is not None and v1.power[1] > 0:
        # the supremum over (s, inf) is infinite, so the integrand vanishes
        zero = np.zeros_like(t)
        return HardyCondition(0.0, float(t[0]), t, zero, False)
    V1 = running_sup_right(v1.values)
    power = None
    if v1.power is not None and w.power is not None:
        # non-increasing declared power: the running sup is v1 itself
        power = (w.power[0] / v1.power[0], w.power[1] - v1.power[1])
    ratio = HalfLineFunction(t, w.values / V1, power)
    try:
        integral = _tail_integrals(ratio, t, log_factor)
    except PreconditionError:
        inf = np.full_like(t, np.inf)
        return HardyCondition(math.inf, float(t[-1]), t, inf, True)
    profile = v2.values * integral
    k = int(np.argmax(profile))
    if not np.any(profile > 0):
        return HardyCondition(0.0, float(t[k]), t, profile, False)
    diverged = detect_divergence(t, np.maximum(profile, 1e-300))
    value = math.inf if diverged else float(profile[k])
    return HardyCondition(value, float(t[k]), t, profile, diverged)


def condition_A(v1, v2, w, full: bool = False):
    """``sup_t v2(t) int_t^inf w(s) / sup_{tau > s} v1(tau) ds`` (``inf`` if divergent)."""
    res = _condition(v1, v2, w, log_factor=False)
    return res if full else res.value


def condition_A_star(v1, v2, w, full: bool = False):
    """As :func:`condition_A` with the factor ``1 + ln(s/t)``."""
    res = _condition(v1, v2, w, log_factor=True)
    return res if full else res.value


def _sup(v: np.ndarray) -> float:
    return float(np.max(v))


def _spread(v: Sequence[float]) -> float:
    lo = min(v)
    return max(v) / lo if lo > 0 else math.inf


def _check_nonincreasing(g: HalfLineFunction) -> None:
    if np.any(g.values < 0) or np.any(np.diff(g.values) > 1e-12 * max(_sup(np.abs(g.values)), 1e-300)):
        raise PreconditionError("corpus functions must be nonnegative and non-increasing")


def _witness_ratios(v1, v2, w, t_max_sweep: Sequence[float]) -> list[float]:
    """Ratios for ``g_T = 1 / sup_{(s,inf)} v1`` cut off at ``T`` (non-decreasing)."""
    out = []
    V1 = running_sup_right(v1.values)
    for T in t_max_sweep:
        sel = v1.t <= T * (1 + 1e-12)
        t = v1.t[sel]
        g = HalfLineFunction(t, 1.0 / V1[sel])
        ww = HalfLineFunction(t, w.values[sel])
        lhs = _sup(v2.values[sel] * hardy_Hw(g, ww, t))
        rhs = _sup(v1.values[sel] * g.values)
        out.append(lhs / rhs)
    return out


def verify_hardy_equivalence(
    v1: HalfLineFunction,
    v2: HalfLineFunction,
    w: HalfLineFunction,
    corpus: Sequence[HalfLineFunction],
    kappa: float = 4.0,
    log_factor: bool = False,
    t_max_sweep: Sequence[float] | None = None,
) -> VerificationReport:
    """Empirical constant of ``sup v2 H g <= C sup v1 g`` over non-increasing ``g``.

    Reports ``C_emp / A``.  When ``A`` is infinite a witness family (cut-off
    ``1 / ess sup v1``, which is non-decreasing) is swept over ``t_max`` to
    exhibit the growth.
    """
    if not corpus:
        raise PreconditionError("empty corpus")
    H = hardy_Hw_star if log_factor else hardy_Hw
    Acond = (condition_A_star if log_factor else condition_A)(v1, v2, w)
    rows, notes = [], []
    for i, g in enumerate(corpus):
        _same_grid(v1, g)
        _check_nonincreasing(g)
        rhs = _sup(v1.values * g.values)
        if rhs == 0:
            notes.append(f"function {i} is zero on the grid; skipped")
            continue
        lhs = _sup(v2.values * H(g, w, v1.t))
        rows.append({"function": i, "transform": "identity", "source": rhs, "target": lhs, "ratio": lhs / rhs})
    if not rows:
        raise PreconditionError("every corpus function vanishes: the ratio is 0/0")
    c_emp = max(r["ratio"] for r in rows)
    extra: dict = {"A": Acond, "C_emp": c_emp, "kappa": kappa}
    if math.isfinite(Acond):
        rel = c_emp / Acond if Acond > 0 else math.inf
        extra["C_over_A"] = rel
        verdict = PASS if rel <= kappa else FAIL
    else:
        sweep = list(t_max_sweep) if t_max_sweep is not None else [v1.t_max / 1e3, v1.t_max / 1e2, v1.t_max / 10, v1.t_max]
        wit = _witness_ratios(v1, v2, w, sweep)
        mono, growth = monotone_growth(wit)
        extra.update({"witness_t_max": sweep, "witness_ratios": wit, "witness_growth": growth})
        verdict = EXPECTED_FAIL if mono else FAIL
    name = "hardy_log" if log_factor else "hardy"
    return VerificationReport(
        theorem_id=f"{name}_equivalence",
        operator={"kind": "hardy_star" if log_factor else "hardy"},
        exponents={},
        phi={},
        rows=rows,
        fitted_constant=c_emp,
        spread=_spread([r["ratio"] for r in rows]),
        verdict=verdict,
        environment={"t_min": v1.t_min, "t_max": v1.t_max, "points": int(v1.t.size)},
        notes=notes,
        extra=extra,
    )
