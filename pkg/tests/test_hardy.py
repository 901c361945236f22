from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from mixmorrey import hardy as H
from mixmorrey.errors import PreconditionError
from mixmorrey.verify.report import EXPECTED_FAIL, PASS

T = H.log_grid()
ONE = H.power_function(0.0)
ZERO = H.sampled_function(T, np.zeros_like(T))


def _pw(e):
    return H.power_function(e)


def test_closed_forms():
    t = T[::64]
    np.testing.assert_allclose(H.hardy_Hw(ONE, _pw(-2), t), 1 / t, rtol=1e-3)
    np.testing.assert_allclose(H.hardy_Hw(_pw(-1), _pw(-1), t), 1 / t, rtol=1e-3)
    np.testing.assert_allclose(H.hardy_Hw_star(ONE, _pw(-2), t), 2 / t, rtol=1e-3)
    assert np.all(H.hardy_Hw(ZERO, _pw(-2), t) == 0)
    assert np.all(H.hardy_Hw_star(ZERO, _pw(-2), t) == 0)


def test_sampled_against_quad():
    # no declared power: the integral stops at t_max, the oracle does too
    g = H.sampled_function(T, np.exp(-T))
    w = H.sampled_function(T, 1 / (1 + T))
    for t in (1e-2, 0.5, 3.0):
        ref, _ = quad(lambda s: math.exp(-s) / (1 + s), t, H.T_MAX, limit=200)
        assert H.hardy_Hw(g, w, t) == pytest.approx(ref, rel=1e-3)
        ref_star, _ = quad(lambda s: (1 + math.log(s / t)) * math.exp(-s) / (1 + s), t, H.T_MAX, limit=200)
        assert H.hardy_Hw_star(g, w, t) == pytest.approx(ref_star, rel=1e-3)


def test_non_integrable_tail_rejected():
    with pytest.raises(PreconditionError, match="not integrable"):
        H.hardy_Hw(ONE, _pw(-1), 1.0)
    with pytest.raises(PreconditionError):
        H.hardy_Hw(ONE, _pw(-2), 1e4)


def test_conditions():
    assert H.condition_A(_pw(-1), _pw(1), _pw(-3)) == pytest.approx(1.0, rel=1e-3)
    assert H.condition_A_star(_pw(-1), _pw(1), _pw(-3)) == pytest.approx(2.0, rel=1e-3)
    assert H.condition_A(_pw(-1), _pw(2), _pw(-3)) == math.inf
    assert H.condition_A(_pw(-1), ZERO, _pw(-3)) == 0.0
    assert H.condition_A_star(_pw(-1), ZERO, _pw(-3)) == 0.0
    with pytest.raises(PreconditionError):
        H.condition_A(ZERO, _pw(1), _pw(-3))


def test_running_sup():
    np.testing.assert_array_equal(H.running_sup_right(np.array([1, 3, 2, 0.5])), [3, 3, 2, 0.5])


def test_equivalence_pass():
    corpus = [_pw(-mu) for mu in (0, 0.5, 1, 2)]
    rep = H.verify_hardy_equivalence(_pw(-1), _pw(1), _pw(-3), corpus)
    assert rep.verdict == PASS and rep.extra["C_over_A"] <= 4


def test_equivalence_divergent_witness():
    rep = H.verify_hardy_equivalence(_pw(-1), _pw(2), _pw(-3), [ONE])
    assert rep.verdict == EXPECTED_FAIL
    wit = rep.extra["witness_ratios"]
    assert all(b > a for a, b in zip(wit, wit[1:])) and wit[-1] / wit[0] >= 10


def test_equivalence_rejects_bad_corpus():
    with pytest.raises(PreconditionError):
        H.verify_hardy_equivalence(_pw(-1), _pw(1), _pw(-3), [ZERO])
    with pytest.raises(PreconditionError):
        H.verify_hardy_equivalence(_pw(-1), _pw(1), _pw(-3), [])
    with pytest.raises(PreconditionError):
        H.verify_hardy_equivalence(_pw(-1), _pw(1), _pw(-3), [_pw(0.5)])


@given(st.floats(0.0, 3.0), st.floats(-3.0, -1.5), st.floats(0.0, 10.0))
def test_homogeneity_and_star_dominance(mu, e, c):
    g, w = _pw(-mu), _pw(e)
    t = T[::32]
    cg = H.power_function(-mu, c)
    np.testing.assert_allclose(H.hardy_Hw(cg, w, t), c * H.hardy_Hw(g, w, t), rtol=1e-12)
    assert np.all(H.hardy_Hw_star(g, w, t) >= H.hardy_Hw(g, w, t))


@given(st.integers(0, 2**31))
def test_monotone_in_g(seed):
    r = np.random.default_rng(seed)
    w = H.sampled_function(T, 1 / (1 + T) ** 2)
    g2 = H.sampled_function(T, r.uniform(0, 2, T.size))
    g1 = H.sampled_function(T, g2.values * r.uniform(0, 1, T.size))
    assert np.all(H.hardy_Hw(g1, w, T) <= H.hardy_Hw(g2, w, T) + 1e-15)
    assert np.all(H.hardy_Hw_star(g1, w, T) <= H.hardy_Hw_star(g2, w, T) + 1e-15)


@given(st.floats(-1.0, 1.0), st.floats(0.0, 2.0), st.floats(-3.5, -1.2))
def test_A_star_dominates_A(a1, a2, e):
    v1, v2, w = _pw(a1), _pw(a2), _pw(e)
    assert H.condition_A_star(v1, v2, w) >= H.condition_A(v1, v2, w)
