from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mixmorrey import gridfn as G
from mixmorrey import norms as N
from mixmorrey.balls import default_ball_grid
from mixmorrey.errors import PreconditionError, SaturationError
from mixmorrey.phicond import PhiFamily

from conftest import indicator


def _box2(a1, b1, a2, b2):
    return lambda x, y: (((x > a1) & (x < b1)) & ((y > a2) & (y < b2))).astype(float)


def test_unit_square_indicator():
    f = G.sample(_box2(0, 1, 0, 1), [(-1, 2), (-1, 2)], (60, 60))
    for q in ((2, 4), (1, 3), (5, 1.5)):
        assert N.mixed_norm(f, q) == pytest.approx(1.0, rel=1e-12)


def test_separable_product():
    f = G.sample(_box2(0, 2, 0, 3), [(-1, 3), (-1, 4)], (400, 500))
    assert N.mixed_norm(f, (2, 4)) == pytest.approx(2**0.5 * 3**0.25, rel=1e-12)


def test_interval_closed_form():
    f = G.sample(indicator(-0.75, 0.75), [(-2.0, 2.0)], 160)
    for q in (1, 2, 3.5):
        assert N.mixed_norm(f, q) == pytest.approx(1.5 ** (1 / q), rel=1e-12)


def test_mixed_norm_nesting_order():
    # innermost integration runs over x1 (axis 0)
    f = G.sample(lambda x, y: np.where(x < 0.5, 1.0, 2.0) * (y < 0.5), [(0, 1), (0, 1)], (2, 2))
    inner = ((0.5 * 1 + 0.5 * 2**2) ** 0.5)
    assert N.mixed_norm(f, (2, 1)) == pytest.approx(0.5 * inner, rel=1e-12)


def test_conjugate():
    assert N.conjugate(G.as_exponents((2, 2), 2)).entries == (2.0, 2.0)
    c = N.conjugate(G.as_exponents((2, 4), 2)).entries
    assert c[0] == pytest.approx(2) and c[1] == pytest.approx(4 / 3)
    assert N.conjugate(G.as_exponents(3, 1)).entries[0] == pytest.approx(1.5)
    with pytest.raises(PreconditionError):
        N.conjugate(G.as_exponents((1, 2), 2))


def test_local_mixed_norm():
    one = G.sample(lambda x: np.ones_like(x), [(-2.0, 2.0)], 400)
    assert N.local_mixed_norm(one, 2, G.Ball((0.0,), 1.0)) == pytest.approx(math.sqrt(2), rel=1e-12)
    assert N.local_mixed_norm(one.with_values(np.zeros(400)), 2, G.Ball((0.0,), 1.0)) == 0.0
    f = G.sample(indicator(-1, 1), [(-2.0, 2.0)], 400)
    assert N.local_mixed_norm(f, 3, G.Ball((0.0,), 2.0)) == pytest.approx(N.mixed_norm(f, 3), rel=1e-14)


def test_gen_morrey_example():
    f = G.sample(indicator(-1, 1), [(-4.0, 4.0)], 4096)
    phi = lambda x, r: (2 * r) ** (-0.5)
    res = N.gen_morrey_norm(f, 1.0, phi)
    assert res.value == pytest.approx(math.sqrt(2), rel=5e-3)
    assert res.ball.radius == pytest.approx(1.0, rel=0.05)
    assert N.mixed_morrey_norm(f, 2.0, 1.0).value == pytest.approx(math.sqrt(2), rel=5e-3)


def test_morrey_reduces_to_lebesgue_when_p_equals_q():
    f = G.sample(indicator(-1, 1), [(-4.0, 4.0)], 4096)
    for q in (1.5, 2.0, 3.0):
        assert N.mixed_morrey_norm(f, q, q).value == pytest.approx(2 ** (1 / q), rel=2e-3)


def test_zero_function_norms():
    z = G.sample(lambda x: np.zeros_like(x), [(-1.0, 1.0)], 64)
    assert N.mixed_norm(z, 2) == 0.0
    assert N.mixed_morrey_norm(z, 2.0, 2.0).value == 0.0
    grid = default_ball_grid(z)
    assert N.gen_mixed_morrey_norm(z, N.MorreyParams(G.as_exponents(2, 1), PhiFamily.power(0.5), grid)).value == 0.0


def test_morrey_parameter_constraint():
    f = G.sample(indicator(-1, 1), [(-4.0, 4.0)], 256)
    with pytest.raises(PreconditionError, match="n/p"):
        N.mixed_morrey_norm(f, 1.0, 2.0)


def test_normalization_canceling_phi_gives_lebesgue():
    f = G.sample(lambda x: np.exp(-x * x / 0.1), [(-4.0, 4.0)], 2048)
    phi = lambda x, r: (2 * r) ** (-0.5)  # 1 / ||chi_B||_2
    grid = default_ball_grid(f, stride=4)
    val = N.gen_morrey_norm(f, 2.0, phi, grid).value
    assert val == pytest.approx(N.mixed_norm(f, 2.0), rel=1e-3)


def test_gen_mixed_equals_gen_scalar_path():
    f = G.sample(lambda x: np.exp(-(x - 0.3) ** 2), [(-4.0, 4.0)], 1024)
    phi = PhiFamily.power(0.4)
    grid = default_ball_grid(f)
    a = N.gen_mixed_morrey_norm(f, N.MorreyParams(G.as_exponents(2.0, 1), phi, grid)).value
    b = N.gen_morrey_norm(f, 2.0, phi, grid).value
    assert a == pytest.approx(b, rel=1e-6)


def test_bmo_examples():
    c = G.sample(lambda x: np.full_like(x, 3.0), [(-4.0, 4.0)], 1024)
    assert N.bmo_norm(c).value == 0.0
    assert N.bmo_q_norm(c, 2.0).value == 0.0
    assert N.bmo_mixed_norm(c, 2.0).value == 0.0
    h = G.sample(lambda x: (x >= 0).astype(float), [(-4.0, 4.0)], 4096)
    assert N.bmo_norm(h).value == pytest.approx(0.5, rel=1e-3)


def test_bmo_log_variants_comparable():
    b = G.sample(lambda x: np.log(np.abs(x)), [(-10.0, 10.0)], 4096)
    vals = [N.bmo_norm(b).value, N.bmo_q_norm(b, 2.0).value, N.bmo_mixed_norm(b, 2.0).value]
    assert all(np.isfinite(vals)) and max(vals) / min(vals) < 4


def test_bmo_q_dominates_bmo():
    b = G.sample(lambda x: np.sin(3 * x) + (x > 1), [(-4.0, 4.0)], 1024)
    grid = default_ball_grid(b)
    assert N.bmo_q_norm(b, 2.5, grid).value >= N.bmo_norm(b, grid).value


def test_ball_average_gap():
    b = G.sample(lambda x: np.log(np.abs(x)), [(-10.0, 10.0)], 16384)
    assert N.ball_average_gap(b, (0.0,), 0.5, 5.0) == pytest.approx(math.log(10), rel=1e-2)
    h = G.sample(lambda x: (x >= 0).astype(float), [(-4.0, 4.0)], 4096)
    assert N.ball_average_gap(h, (0.0,), 0.5, 2.0) == pytest.approx(0.0, abs=1e-12)
    c = h.with_values(np.ones(4096))
    assert N.ball_average_gap(c, (0.0,), 0.5, 2.0) == 0.0
    with pytest.raises(PreconditionError):
        N.ball_average_gap(h, (0.0,), 1.0, 2.0)


@pytest.mark.parametrize("q", [(2.0,), (1.5,), (3.0,)])
def test_dilation_law_1d(q):
    f = G.sample(lambda x: np.exp(-x * x), [(-8.0, 8.0)], 4096)
    base = N.mixed_norm(f, q)
    for lam in (0.125, 0.5, 2.0, 8.0):
        g = G.dilate_translate(f, lam)
        assert N.mixed_norm(g, q) == pytest.approx(lam ** (-1 / q[0]) * base, rel=1e-10)


@given(st.integers(-40, 40))
def test_translation_invariance(shift):
    f = G.sample(indicator(-0.5, 0.7), [(-4.0, 4.0)], 400)
    vals = np.roll(f.values, shift)
    assert N.mixed_norm(f.with_values(vals), 2.5) == pytest.approx(N.mixed_norm(f, 2.5), rel=1e-12)


@given(st.integers(0, 2**31), st.floats(1.2, 4.0), st.floats(1.2, 4.0))
def test_holder(seed, q1, q2):
    r = np.random.default_rng(seed)
    f = G.sample(lambda x, y: x + y, [(0, 1), (0, 2)], (12, 10))
    u, v = f.with_values(r.normal(size=(12, 10))), f.with_values(r.normal(size=(12, 10)))
    q = G.as_exponents((q1, q2), 2)
    assert abs(G.integrate(u * v)) <= N.mixed_norm(u, q) * N.mixed_norm(v, N.conjugate(q)) * (1 + 1e-12)


def test_holder_equality_on_unit_cube():
    f = G.sample(_box2(0, 1, 0, 1), [(-1, 2), (-1, 2)], (30, 30))
    q = G.as_exponents((2, 3), 2)
    assert G.integrate(f * f) == pytest.approx(N.mixed_norm(f, q) * N.mixed_norm(f, N.conjugate(q)), rel=1e-12)


@given(st.integers(0, 2**31), st.floats(1.0, 5.0))
def test_monotonicity(seed, q):
    r = np.random.default_rng(seed)
    g = G.sample(lambda x: x, [(-2.0, 2.0)], 128).with_values(r.uniform(0, 2, 128))
    f = g.with_values(g.values * r.uniform(0, 1, 128))
    assert N.mixed_norm(f, q) <= N.mixed_norm(g, q) * (1 + 1e-12)
    grid = default_ball_grid(g)
    assert N.mixed_morrey_norm(f, q, q, grid).value <= N.mixed_morrey_norm(g, q, q, grid).value * (1 + 1e-12)


def test_saturation_error():
    f = G.sample(lambda x: np.full_like(x, 1e300), [(0.0, 1e20)], 8)
    assert N.mixed_norm(f, 8.0) == pytest.approx(1e300 * 1e20 ** 0.125)
    with pytest.raises(SaturationError):
        N.mixed_norm(f, 1.0)
