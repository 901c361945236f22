from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from mixmorrey import gridfn as G
from mixmorrey import operators as O
from mixmorrey.balls import radius_grid
from mixmorrey.errors import PreconditionError
from mixmorrey.norms import local_mixed_norm, mixed_norm

from conftest import indicator

BOX = [(-8.0, 8.0)]
N = 4096
FINE = radius_grid(16.0 / N, 16.0, 512)


def _sample(expr, box=BOX, n=N):
    return G.sample(expr, box, n)


def _maximal_oracle(x, a=-1.0, b=1.0):
    r = np.linspace(1e-3, 10, 200001)
    return float(np.max(np.clip(np.minimum(b, x + r) - np.maximum(a, x - r), 0, None) / (2 * r)))


def test_maximal_of_constant_is_one_inside():
    f = _sample(lambda x: np.ones_like(x), n=512)
    np.testing.assert_allclose(O.hl_maximal(f).values, 1.0, rtol=1e-12)


def test_maximal_point_values():
    f = _sample(indicator(-1, 1))
    assert O.hl_maximal(f, at=0.0) == pytest.approx(1.0, rel=1e-12)
    m2 = O.hl_maximal(f, FINE, at=2.0)
    assert m2 == pytest.approx(_maximal_oracle(2.0), rel=1e-2)
    assert _maximal_oracle(2.0) == pytest.approx(1 / 3, rel=1e-4)


def test_frac_maximal_values():
    f = _sample(indicator(-1, 1))
    assert O.frac_maximal(f, 0.5, FINE, at=0.0) == pytest.approx(math.sqrt(2), rel=1e-2)
    z = f.with_values(np.zeros(N))
    assert np.all(O.frac_maximal(z, 0.5).values == 0)
    with pytest.raises(PreconditionError):
        O.frac_maximal(f, 1.0)


def test_riesz_values_against_quadrature():
    f = _sample(indicator(0, 1))
    assert O.riesz_potential(f, 0.5, at=0.0) == pytest.approx(2.0, rel=1e-2)
    ref, _ = quad(lambda y: (2 - y) ** -0.5, 0, 1)
    assert ref == pytest.approx(2 * (math.sqrt(2) - 1), rel=1e-10)
    assert O.riesz_potential(f, 0.5, at=2.0) == pytest.approx(ref, rel=1e-3)
    assert np.all(O.riesz_potential(f.with_values(np.zeros(N)), 0.5).values == 0)
    with pytest.raises(PreconditionError):
        O.riesz_potential(f, 0.0)


def test_riesz_self_cell_matters():
    # the cell-center value inside supp f tracks the exact integral
    f = _sample(indicator(-1, 1))
    x = f.axis_centers(0)[N // 2]
    exact, _ = quad(lambda y: abs(x - y) ** -0.5, -1, 1, points=[x])
    assert O.riesz_potential(f, 0.5).values[N // 2] == pytest.approx(exact, rel=1e-6)


def test_riesz_2d_disk_center():
    f = G.sample(lambda x, y: (x * x + y * y < 1).astype(float), [(-2, 2), (-2, 2)], (128, 128))
    val = O.riesz_potential(f, 1.0).values[63:65, 63:65].mean()
    assert val == pytest.approx(2 * math.pi, rel=2e-2)


def test_pv_values():
    f = _sample(indicator(-1, 1))
    assert abs(O.pv_kernel(f, at=0.0)) < 1e-10
    assert O.pv_kernel(f, at=2.0) == pytest.approx(math.log(3), rel=1e-3)
    even = _sample(lambda x: np.where(np.abs(x - 1) < 0.5, np.cos(np.pi * (x - 1)), 0.0))
    assert abs(O.pv_kernel(even, at=1.0)) < 1e-10
    # odd about x0: the integrand (y - x0) / (x0 - y) is identically -1
    # (evaluated at a cell center: at a cell edge the piecewise-constant jump is log-singular)
    c = even.axis_centers(0)[N // 2 + N // 16]
    odd = _sample(lambda x: np.where(np.abs(x - c) < 0.5, x - c, 0.0))
    assert O.pv_kernel(odd, at=c) == pytest.approx(-1.0, rel=1e-2)
    with pytest.raises(PreconditionError):
        O.pv_kernel(G.sample(lambda x, y: x, [(0, 1), (0, 1)], (4, 4)))


def test_envelope():
    f = _sample(indicator(-1, 1))
    assert O.envelope(f, 0.0, 2.0) == pytest.approx(math.log(3), rel=1e-3)
    assert O.envelope(f.with_values(np.zeros(N)), 0.0, 2.0) == 0.0
    with pytest.raises(PreconditionError):
        O.envelope(f, 0.0, 0.5)
    g = _sample(lambda x: np.exp(-x * x))
    xs = np.array([-1.3, 0.2, 2.5])
    np.testing.assert_allclose(O.envelope(g, 0.5, xs), O.riesz_potential(g, 0.5, at=xs), rtol=1e-10)


def test_commutator_maximal_value():
    b = _sample(lambda x: (x >= 0).astype(float))
    f = _sample(indicator(0, 1))
    coarse = O.commutator_maximal(b, f, 0.5, radius_grid(16.0 / N, 16.0, 256), at=-1.0)
    fine = O.commutator_maximal(b, f, 0.5, radius_grid(16.0 / N, 16.0, 2560), at=-1.0)
    assert coarse == pytest.approx(fine, rel=5e-3)
    assert fine == pytest.approx(0.5, rel=5e-3)


def test_commutators_with_constant_symbol_vanish():
    b = _sample(lambda x: np.full_like(x, 2.5), n=1024)
    f = _sample(lambda x: np.exp(-x * x), n=1024)
    assert np.max(np.abs(O.commutator_maximal(b, f, 0.5).values)) == 0.0
    assert np.max(np.abs(O.commutator_riesz(b, f, 0.5).values)) < 1e-12
    assert np.max(np.abs(O.commutator_pv(b, f).values)) < 1e-12


def test_commutator_riesz_values():
    h = _sample(lambda x: (x >= 0).astype(float))
    f = _sample(indicator(0, 1))
    assert abs(O.commutator_riesz(h, f, 0.5, at=-2.0)) == pytest.approx(2 * (math.sqrt(3) - math.sqrt(2)), rel=1e-3)
    b = _sample(indicator(0, 1))
    inside = f.axis_centers(0)[(f.axis_centers(0) > 0.2) & (f.axis_centers(0) < 0.8)]
    assert np.max(np.abs(O.commutator_riesz(b, f, 0.5, at=inside[::50]))) < 1e-12


def test_operator_spec_rules():
    b = _sample(lambda x: x, n=64)
    with pytest.raises(PreconditionError):
        O.OperatorSpec("maximal", 0.5)
    with pytest.raises(PreconditionError):
        O.OperatorSpec("riesz_potential", 0.0)
    with pytest.raises(PreconditionError):
        O.OperatorSpec("commutator_riesz", 0.5)
    with pytest.raises(PreconditionError):
        O.OperatorSpec("maximal", 0.0, b)
    with pytest.raises(PreconditionError):
        O.OperatorSpec("bogus")
    f = _sample(lambda x: np.exp(-x * x), n=64)
    np.testing.assert_array_equal(O.apply(O.OperatorSpec("pv_kernel"), f).values, O.pv_kernel(f).values)


@given(st.integers(0, 2**31))
def test_sublinearity(seed):
    r = np.random.default_rng(seed)
    base = _sample(lambda x: x, n=256)
    f, g = base.with_values(r.normal(size=256)), base.with_values(r.normal(size=256))
    s = f + g
    for op in (O.hl_maximal, lambda u: O.frac_maximal(u, 0.5)):
        assert np.all(op(s).values <= op(f).values + op(g).values + 1e-12)
    for op in (lambda u: O.riesz_potential(u, 0.5), O.pv_kernel):
        np.testing.assert_allclose(op(s).values, op(f).values + op(g).values, atol=1e-10)


@given(st.floats(-0.5, 0.5), st.floats(2.0, 6.0))
def test_pv_size_condition(c, x):
    f = _sample(lambda y: np.where(np.abs(y - c) < 1, np.cos(3 * y), 0.0))
    assert abs(O.pv_kernel(f, at=x)) <= O.envelope(f, 0.0, x) * (1 + 1e-10)


@given(st.floats(-6.0, 6.0))
def test_commutator_riesz_size_condition(x):
    b = _sample(lambda y: np.log(np.abs(y)), n=1024)
    f = _sample(lambda y: np.exp(-y * y) * np.sin(2 * y), n=1024)
    val = abs(O.commutator_riesz(b, f, 0.5, at=x))
    assert val <= O.envelope_commutator(b, f, 0.5, x) * (1 + 1e-10) + 1e-12


def test_maximal_bounded_on_lebesgue_across_dilations():
    q = 2.0
    ratios = []
    for lam in (0.125, 0.5, 1.0, 2.0, 8.0):
        f = G.dilate_translate(_sample(lambda x: np.exp(-((x - 0.3) ** 2) / 0.2)), lam)
        ratios.append(mixed_norm(O.hl_maximal(f), q) / mixed_norm(f, q))
    assert max(ratios) / min(ratios) < 1.25


def test_pv_far_from_ball_matches_closed_form():
    # ||K f||_{L^1(B(x0, r))} for f = chi_[-1,1], B = (4.5, 5.5)
    f = _sample(indicator(-1, 1))
    Kf = O.pv_kernel(f)
    got = local_mixed_norm(Kf, 1.0, G.Ball((5.0,), 0.5))
    exact, _ = quad(lambda x: math.log((x + 1) / (x - 1)), 4.5, 5.5)
    assert got == pytest.approx(exact, rel=1e-2)
