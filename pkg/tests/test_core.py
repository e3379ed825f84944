import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from smoothness_lab.core import (
    FuncRep,
    NumericalError,
    Regime,
    RegimeError,
    ValidationError,
    WeightedSpace,
    cheb_interior,
    gauss_rule,
    lp_from_samples,
    to_cheb,
    weighted_norm,
    weighted_rule,
)


@pytest.mark.parametrize("a,b", [(0, 0), (2, 2), (0, 4), (1.5, 0.5)])
def test_gauss_jacobi_exact_for_polynomials(a, b):
    rule = gauss_rule("gauss_jacobi", 10, a, b)
    for k in range(0, 19):
        exact = integrate.quad(lambda x: x**k, -1, 1, weight="alg", wvar=(b, a))[0]
        assert rule.integrate(rule.nodes**k) == pytest.approx(exact, abs=1e-12)


def test_chebyshev_and_trapezoid_rules():
    ch = gauss_rule("gauss_chebyshev", 16)
    assert ch.integrate(ch.nodes**2) == pytest.approx(math.pi / 2)
    tr = gauss_rule("trapezoid_periodic", 16)
    assert tr.integrate(np.cos(tr.nodes) ** 4) == pytest.approx(3 * math.pi / 4)


def test_unknown_rule_rejected():
    with pytest.raises(ValidationError):
        gauss_rule("simpson", 8)


def test_weighted_rule_with_breakpoint():
    x, w = weighted_rule(2.0, 64, (0.0,))
    exact = integrate.quad(lambda t: abs(t) ** 1.5 * (1 - t * t) ** 2, -1, 1, points=[0])[0]
    # x^1.5 is not smooth at the cut, so convergence is algebraic there
    assert w @ np.abs(x) ** 1.5 == pytest.approx(exact, rel=1e-9)


@pytest.mark.parametrize(
    "p,alpha,regime,ok",
    [
        (2, 1, Regime.DIRECT_INVERSE, True),
        (2, 0, Regime.DIRECT_INVERSE, False),
        (1, 1, Regime.DIRECT_INVERSE, True),
        (1, 0.5, Regime.DIRECT_INVERSE, False),
        ("inf", 1, Regime.DIRECT_INVERSE, True),
        ("inf", 1.5, Regime.DIRECT_INVERSE, False),
        (2, -0.4, Regime.H_BOUND, True),
        (2, -0.5, Regime.H_BOUND, False),
        (1, 2, Regime.H_BOUND, True),
        (1, 2, Regime.ED, True),
        (4, 2.4, Regime.ED, False),
        (3, 10, Regime.BERNSTEIN_MARKOV, True),
    ],
)
def test_regimes(p, alpha, regime, ok):
    assert WeightedSpace(p, alpha).admits(regime) is ok


def test_regime_error_names_the_bound():
    with pytest.raises(RegimeError, match="DirectInverse at p=2: 0.75 < alpha < 1.25"):
        WeightedSpace(2, 0, Regime.DIRECT_INVERSE)


def test_bad_p():
    with pytest.raises(ValidationError):
        WeightedSpace(0.5, 1)


def test_norm_oracles():
    one = FuncRep.constant(1.0)
    assert weighted_norm(one, WeightedSpace(2, 1)) == pytest.approx(math.sqrt(16 / 15))
    assert weighted_norm(one, WeightedSpace(1, 1)) == pytest.approx(4 / 3)
    assert weighted_norm(one, WeightedSpace("inf", 1)) == pytest.approx(1.0)
    x = FuncRep.monomial([0, 1])
    assert weighted_norm(x, WeightedSpace("inf", 1), 256) == pytest.approx(2 / (3 * math.sqrt(3)), rel=1e-12)


def test_norm_resolution_guard():
    with pytest.raises(ValidationError):
        weighted_norm(FuncRep.constant(1.0), WeightedSpace(2, 1), resolution=8)


def test_nonfinite_values_raise():
    f = FuncRep.from_callable(lambda x: 1 / (1 - x * x))
    with pytest.raises(NumericalError):
        weighted_norm(f, WeightedSpace("inf", 1))


def test_funcrep_arithmetic():
    a = FuncRep.monomial([1, 2])
    b = FuncRep.monomial([0, 0, 3])
    x = np.linspace(-1, 1, 7)
    assert np.allclose((a + b)(x), 1 + 2 * x + 3 * x * x)
    assert np.allclose((a - 2 * b)(x), 1 + 2 * x - 6 * x * x)
    c = FuncRep.from_callable(np.exp)
    assert np.allclose((c - a)(x), np.exp(x) - 1 - 2 * x)


def test_interpolants():
    f = FuncRep.from_callable(np.exp)
    x = np.linspace(-1, 1, 11)
    assert np.max(np.abs(to_cheb(f, 20)(x) - np.exp(x))) < 1e-14
    assert np.max(np.abs(cheb_interior(np.exp, 20)(x) - np.exp(x))) < 1e-14


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=30), st.sampled_from([1.0, 2.0, 3.5, math.inf]))
def test_lp_from_samples_is_a_seminorm(vals, p):
    v = np.array(vals)
    w = np.full(len(v), 0.5)
    assert lp_from_samples(2 * v, w, p) == pytest.approx(2 * lp_from_samples(v, w, p))
    assert lp_from_samples(v + v[::-1], w, p) <= lp_from_samples(v, w, p) + lp_from_samples(v[::-1], w, p) + 1e-12
