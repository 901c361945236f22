from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize_scalar

from mixmorrey import gridfn as G
from mixmorrey import weights as W
from mixmorrey.balls import BallGrid, default_ball_grid, radius_grid
from mixmorrey.errors import PreconditionError

BOX = [(-4.0, 4.0)]


def a2_sqrt_sup() -> float:
    """Sup over intervals [u, 1] of the A_2 product for |x|^{1/2} (scale invariance fixes v = 1)."""
    F = lambda x: np.sign(x) * (2.0 / 3.0) * abs(x) ** 1.5
    Gi = lambda x: np.sign(x) * 2.0 * abs(x) ** 0.5
    prod = lambda u: (F(1) - F(u)) * (Gi(1) - Gi(u)) / (1 - u) ** 2
    res = minimize_scalar(lambda u: -prod(u), bounds=(-1.0, 0.999), method="bounded", options={"xatol": 1e-10})
    return max(-res.fun, prod(-1.0))


def test_oracle_values():
    assert a2_sqrt_sup() == pytest.approx(1.5, abs=1e-6)
    assert a2_sqrt_sup() > 4 / 3


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 6.0])
def test_constant_weight_is_exactly_one(p):
    for c in (1.0, 7.5):
        w = W.constant_weight(BOX, 1024, c)
        assert W.ap_characteristic(w, p).value == pytest.approx(1.0, rel=1e-12)
    assert W.a1_characteristic(W.constant_weight(BOX, 1024)).value == pytest.approx(1.0, rel=1e-12)


def test_sqrt_weight_origin_family_and_full_grid():
    n = 16384
    w = W.power_weight(BOX, n, 0.5)
    origin = BallGrid(np.array([[n // 2]]), radius_grid(8.0 / n, 3.9, 64))
    assert W.ap_characteristic(w, 2.0, origin).value == pytest.approx(4 / 3, rel=2e-2)
    full = W.ap_characteristic(w, 2.0, default_ball_grid(w.w))
    assert full.value == pytest.approx(a2_sqrt_sup(), rel=2e-2)


@given(st.floats(-0.8, 1.5), st.floats(1.2, 5.0))
def test_ap_at_least_one_on_every_ball(a, p):
    w = W.power_weight(BOX, 512, a)
    prods = W.ap_products(w, p)
    vals = prods[np.isfinite(prods)]
    assert vals.size > 0 and np.all(vals >= 1.0 - 1e-12)


@given(st.floats(0.1, 100.0))
def test_ap_scale_invariance(c):
    w = W.power_weight(BOX, 512, 0.7)
    cw = W.Weight(w.w.with_values(c * w.values))
    assert W.ap_characteristic(cw, 2.0).value == pytest.approx(W.ap_characteristic(w, 2.0).value, rel=1e-12)


def test_ap_monotone_in_p_per_ball():
    w = W.power_weight(BOX, 512, -0.6)
    lo, hi = W.ap_products(w, 1.5), W.ap_products(w, 3.0)
    ok = np.isfinite(lo)
    assert np.all(hi[ok] <= lo[ok] * (1 + 1e-12))


def test_a1_decreasing_radial_stable():
    w = W.Weight(G.sample(lambda x: np.minimum(1.0, np.abs(x) ** -0.5), BOX, 4096))
    coarse = W.a1_characteristic(w, default_ball_grid(w.w, per_decade=32)).value
    fine = W.a1_characteristic(w, default_ball_grid(w.w, per_decade=64)).value
    assert math.isfinite(coarse) and abs(fine / coarse - 1) < 0.1


def test_a1_exponential_grows_with_box():
    vals = [W.a1_characteristic(W.exponential_weight([(-L, L)], 1024)).value for L in (2.0, 4.0, 8.0)]
    assert vals[0] < vals[1] < vals[2] and vals[2] / vals[0] > 10


def test_aqp():
    assert W.aqp_check(W.constant_weight(BOX, 1024), 2.0, 2.5).value == pytest.approx(1.0, rel=1e-12)
    w = W.power_weight(BOX, 2048, -0.3)
    assert math.isfinite(W.a1_characteristic(w).value)
    assert math.isfinite(W.aqp_check(w, 1.5, 2.0).value)
    s = W.power_weight(BOX, 2048, 0.5)
    res = W.aqp_check(s, 2.0, 2.5)
    assert math.isfinite(res.value) and abs(res.ball.center[0]) <= res.ball.radius
    with pytest.raises(PreconditionError):
        W.aqp_check(s, 2.0, 2.0)
    with pytest.raises(PreconditionError):
        W.aqp_check(s, 2.0, 1.5)


def test_weight_rejects_nonpositive():
    with pytest.raises(PreconditionError):
        W.Weight(G.sample(lambda x: x, BOX, 16))
    with pytest.raises(PreconditionError):
        W.make_weight("bogus", BOX, 16)


def test_rubio_zero_and_constant():
    z = G.sample(lambda x: np.zeros_like(x), BOX, 512)
    assert np.all(W.rubio_iteration(z, 2.0).Rh.values == 0)
    one = G.sample(lambda x: np.ones_like(x), BOX, 512)
    B = 3.0
    res = W.rubio_iteration(one, 2.0, B=B, check=False, boundary="exclude", centered=True)
    interior = res.Rh.values[200:312]
    np.testing.assert_allclose(interior, 1.0 / (1.0 - 1.0 / (2 * B)), rtol=1e-6)


def test_rubio_properties_on_indicator():
    h = G.sample(lambda x: ((x > 0) & (x < 1)).astype(float), BOX, 1024)
    res = W.rubio_iteration(h, 2.0)
    assert res.checks["pointwise"] and res.checks["norm"]
    assert res.checks["a1_over_B"] <= 2.2
    assert np.all(res.Rh.values >= h.values)
    assert res.terms_used == 20 and res.tail_estimate >= 0


def test_rubio_errors():
    h = G.sample(lambda x: np.sin(x), BOX, 64)
    with pytest.raises(PreconditionError):
        W.rubio_iteration(h, 2.0)
    p = G.sample(lambda x: np.exp(-x * x), BOX, 256)
    with pytest.raises(PreconditionError):
        W.rubio_iteration(p, 2.0, K=1, tol=1e-12)
    with pytest.raises(PreconditionError):
        W.rubio_iteration(p, 2.0, K=0)
