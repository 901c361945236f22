"""Radial phi families and the integral conditions that couple a pair of them.

For a pair ``(phi1, phi2)`` and exponents ``q`` (optionally a target ``p``)
the condition functional is

    sup_r  phi2(r)^{-1} * int_r^inf L(t, r) * einf(t) * t^{-1-sum 1/p_i} dt

with ``einf(t) = inf_{s > t} phi1(s) s^{sum 1/q_i}`` and ``L = 1`` or
``1 + ln(t/r)``.  Pure power families have closed-form tails and a closed
form for the whole integral; other families are integrated on a log grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .errors import PreconditionError, VanishingTailWarning
from .gridfn import ExponentVector
from .sweep import detect_divergence

#: Points per decade of the inner t-quadrature, and its truncation factor.
T_PER_DECADE = 128
T_SPAN_DECADES = 3
#: Default r-sweep of the condition.
R_SWEEP = (1e-4, 1e4)
R_PER_DECADE = 16


@dataclass(frozen=True)
class PhiFamily:
    """``phi(x, r) = r**(-lam) * (1 + |ln r|)**log_exponent`` (``x`` unused)."""

    kind: str = "power"
    lam: float = 0.0
    log_exponent: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("power", "power_log"):
            raise PreconditionError(f"unknown phi family kind {self.kind!r}")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise PreconditionError(f"decay exponent must be >= 0, got {self.lam}")
        if self.kind == "power" and self.log_exponent != 0.0:
            raise PreconditionError("log_exponent is only meaningful for power_log")

    @classmethod
    def power(cls, lam: float) -> "PhiFamily":
        return cls("power", float(lam))

    @property
    def is_power(self) -> bool:
        return self.kind == "power" or self.log_exponent == 0.0

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        out = r ** (-self.lam)
        if self.kind == "power_log" and self.log_exponent != 0.0:
            out = out * (1.0 + np.abs(np.log(r))) ** self.log_exponent
        return out

    def __call__(self, x, r):
        return self.radial(r)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "lambda": self.lam}
        if self.kind == "power_log":
            d["log_exponent"] = self.log_exponent
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PhiFamily":
        return cls(d.get("kind", "power"), float(d.get("lambda", 0.0)),
                   float(d.get("log_exponent", 0.0)))


def _sigma(q) -> float:
    if isinstance(q, ExponentVector):
        return q.reciprocal_sum
    return sum(1.0 / float(v) for v in np.atleast_1d(q))


def ess_inf_tail(phi1: PhiFamily, q, t, t_max: float | None = None):
    """``inf_{t < s <= t_max} phi1(s) s^{sum 1/q_i}``, vectorized over ``t``.

    The grid includes ``s = t``: every family is continuous, so the
    infimum over the open interval equals the one over its closure.

    Power families use the analytic infimum over ``(t, inf)``.  When the
    product decays (``lam > sum 1/q_i``) the infimum is 0 in the limit; the
    value at ``t_max`` (default ``1e3 * t``) is returned together with a
    :class:`VanishingTailWarning`.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise PreconditionError("t must be positive")
    sigma = _sigma(q)
    tm = 10.0**T_SPAN_DECADES * t if t_max is None else np.broadcast_to(t_max, t.shape)
    if phi1.is_power:
        e = sigma - phi1.lam
        if abs(e) < 1e-14:
            return np.ones_like(t)
        if e > 0:
            return t**e
        warnings.warn(
            f"phi1 decays faster than s^-{sigma:g}: the ess-inf tail vanishes "
            "and the integral condition is vacuous",
            VanishingTailWarning,
            stacklevel=2,
        )
        return np.asarray(tm, dtype=float) ** e
    out = np.empty_like(t)
    for idx, (ti, tmi) in enumerate(zip(t.ravel(), np.ravel(tm))):
        n = max(int(T_PER_DECADE * math.log10(tmi / ti)), 2)
        s = ti * (tmi / ti) ** (np.arange(n + 1) / n)
        out.ravel()[idx] = float(np.min(phi1.radial(s) * s**sigma))
    return out


@dataclass
class ConditionResult:
    sup_ratio: float
    argmax_r: float
    r: np.ndarray = field(repr=False)
    profile: np.ndarray = field(repr=False)
    diverged: bool = False
    vacuous: bool = False

    @property
    def finite(self) -> bool:
        return math.isfinite(self.sup_ratio)

    def to_dict(self) -> dict:
        return {
            "sup_ratio": self.sup_ratio if self.finite else "inf",
            "argmax_r": self.argmax_r,
            "diverged": self.diverged,
            "vacuous": self.vacuous,
        }


def _power_tail(T: np.ndarray, r: np.ndarray, beta: float, log_factor: bool) -> np.ndarray:
    """``int_T^inf (1 + ln(t/r))^[log] t^{-1-beta} dt`` for ``beta > 0``."""
    base = T ** (-beta) / beta
    if not log_factor:
        return base
    return base * (1.0 + np.log(T / r)) + T ** (-beta) / beta**2


def condition_integral(
    phi1: PhiFamily,
    q,
    r,
    p=None,
    log_factor: bool = False,
) -> tuple[np.ndarray, bool]:
    """The inner integral for every ``r``; also reports a vanishing ess-inf."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    sigma_q = _sigma(q)
    sigma_t = _sigma(p) if p is not None else sigma_q
    if phi1.is_power:
        return _power_condition_integral(phi1, sigma_q, sigma_t, r, log_factor)
    return _grid_condition_integral(phi1, sigma_q, sigma_t, r, log_factor)


def _power_condition_integral(phi1, sigma_q, sigma_t, r, log_factor):
    """Trapezoid over ``[r, 10^span r]`` in ``ln t`` plus the closed-form tail."""
    n = T_PER_DECADE * T_SPAN_DECADES
    rel = 10.0 ** (np.arange(n + 1) / T_PER_DECADE)
    T = r[:, None] * rel[None, :]
    e = sigma_q - phi1.lam
    if e < -1e-14:
        return np.zeros_like(r), True
    e = e if abs(e) >= 1e-14 else 0.0
    integrand = T ** (e - sigma_t)  # einf(t) t^{-sigma_t}, i.e. the dt-integrand times t
    if log_factor:
        integrand = integrand * (1.0 + np.log(rel))[None, :]
    body = trapezoid(integrand, dx=math.log(10.0) / T_PER_DECADE, axis=1)
    beta = sigma_t - e
    if beta <= 0:
        return np.full_like(r, np.inf), False
    return body + _power_tail(T[:, -1], r, beta, log_factor), False


def _grid_condition_integral(phi1, sigma_q, sigma_t, r, log_factor):
    """One global log grid: running minimum from the right, cumulative integrals.

    The grid runs from ``min r`` to ``10^span max r`` and further until the
    family ``s^e (1 + |ln s|)^gamma`` is increasing, so the running minimum
    equals the infimum over ``(t, inf)``.  The remaining tail is extrapolated
    as a power law fitted on the last decade.
    """
    e = sigma_q - phi1.lam
    gamma = phi1.log_exponent
    if e < 0 or (e == 0 and gamma < 0):
        return np.zeros_like(r), True
    s_end = float(r.max()) * 10.0**T_SPAN_DECADES
    if e > 0 and gamma < 0:
        s_end = max(s_end, 10.0 * math.exp(-gamma / e))
    lo = math.log10(float(r.min()))
    n = int(math.ceil((math.log10(s_end) - lo) * T_PER_DECADE))
    u10 = lo + np.arange(n + 1) / T_PER_DECADE
    t = 10.0**u10
    u = np.log(t)
    einf = np.minimum.accumulate((phi1.radial(t) * t**sigma_q)[::-1])[::-1]
    y = einf * t ** (-sigma_t)
    c0 = cumulative_trapezoid(y[::-1], -u[::-1], initial=0.0)[::-1]
    c1 = cumulative_trapezoid((y * u)[::-1], -u[::-1], initial=0.0)[::-1]
    y0, y1 = y[-T_PER_DECADE - 1], y[-1]
    slope = math.log(y1 / y0) / math.log(10.0) if y0 > 0 and y1 > 0 else -math.inf
    if slope >= 0:
        return np.full_like(r, np.inf), False
    # tails of int y du and int y u du for y ~ y1 exp(slope (u - u_end))
    k = -slope
    tail0 = y1 / k
    tail1 = y1 * (u[-1] / k + 1.0 / k**2)
    lr = np.log(r)
    I0 = np.interp(lr, u, c0) + tail0
    if not log_factor:
        return I0, False
    I1 = np.interp(lr, u, c1) + tail1
    return (1.0 - lr) * I0 + I1, False


def zygmund_condition(
    phi1: PhiFamily,
    phi2: PhiFamily,
    q,
    p=None,
    log_factor: bool = False,
    r_range: tuple[float, float] = R_SWEEP,
    per_decade: int = R_PER_DECADE,
) -> ConditionResult:
    """Sweep ``r`` and return ``sup_r integral(r) / phi2(r)`` or the +inf marker."""
    lo, hi = r_range
    n = int(round(per_decade * math.log10(hi / lo)))
    r = lo * (hi / lo) ** (np.arange(n + 1) / n)
    phi2_vals = phi2.radial(r)
    if np.any(phi2_vals <= 0):
        raise PreconditionError("phi2 must be positive")
    integral, vacuous = condition_integral(phi1, q, r, p=p, log_factor=log_factor)
    ratio = integral / phi2_vals
    if vacuous:
        warnings.warn("ess-inf tail of phi1 vanishes; condition holds vacuously",
                      VanishingTailWarning, stacklevel=2)
    k = int(np.argmax(ratio))
    if not np.all(np.isfinite(ratio)):
        return ConditionResult(math.inf, float(r[k]), r, ratio, True, vacuous)
    diverged = detect_divergence(r, ratio)
    sup = math.inf if diverged else float(ratio[k])
    return ConditionResult(sup, float(r[k]), r, ratio, diverged, vacuous)
