import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from smoothness_lab.approx import (
    SolverConfig,
    alternation,
    bernstein_markov_probe,
    best_approx,
    en_from_D_bound,
    markov_corollary_ratio,
    parseval_en,
)
from smoothness_lab.core import FuncRep, RegimeError, ValidationError, WeightedSpace, norm_nodes, weighted_norm
from smoothness_lab.verify import TrialFamily, random_poly

from conftest import R

X2 = FuncRep.monomial([0, 0, 1])
S21 = WeightedSpace(2, 1)
SUP0 = WeightedSpace("inf", 0)


def test_x2_least_squares():
    res = best_approx(X2, 1, WeightedSpace(2, 0))
    assert res.value == pytest.approx(math.sqrt(8 / 45), abs=1e-12)
    assert res.poly(np.array([0.3])) == pytest.approx([1 / 3])


def test_x2_minimax():
    res = best_approx(X2, 2, SUP0)
    assert res.value == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(res.poly(np.linspace(-1, 1, 5)), 0.5)
    ok, x, e = alternation(res, X2, SUP0)
    assert ok and len(x) == 3


@pytest.mark.parametrize("space", [S21, WeightedSpace(2, 0), SUP0, WeightedSpace("inf", 1), WeightedSpace(1, 1), WeightedSpace(3, 0.5)])
def test_polynomial_reproduced(space):
    f = random_poly(5, 11)
    res = best_approx(f, 6, space)
    assert res.value < 1e-9
    assert np.allclose(res.poly(np.linspace(-1, 1, 9)), f(np.linspace(-1, 1, 9)), atol=1e-8)


def test_chebyshev_equioscillation_weighted():
    f = TrialFamily.standard()["abs32"]
    sp = WeightedSpace("inf", 1)
    for n in (3, 8, 20):
        res = best_approx(f, n, sp)
        assert res.converged
        ok, x, _ = alternation(res, f, sp)
        assert ok
        assert res.certified_gap <= 1e-8 * res.value


def test_remez_matches_classical_Tn():
    # E_n(x^n)_{inf,0} = 2^{1-n}
    for n in (3, 5, 8):
        f = FuncRep.monomial([0] * n + [1])
        assert best_approx(f, n, SUP0).value == pytest.approx(2.0 ** (1 - n), rel=1e-9)


def test_value_is_residual_norm():
    f = TrialFamily.standard()["exp"]
    for sp in (S21, WeightedSpace(3, 1)):
        res = best_approx(f, 4, sp)
        assert res.value == pytest.approx(weighted_norm(f - res.poly, sp, 256), abs=1e-9)


def test_p1_against_lp_oracle():
    sp = WeightedSpace(1, 0)
    res = best_approx(X2, 2, sp)
    x, w = norm_nodes(sp, 256)
    n = len(x)
    V = np.column_stack([np.ones(n), x])
    A = np.block([[-V, -np.eye(n)], [V, -np.eye(n)]])
    b = np.r_[-x**2, x**2]
    lp = linprog(np.r_[0, 0, w], A_ub=A, b_ub=b, bounds=[(None, None)] * 2 + [(0, None)] * n, method="highs")
    assert res.value == pytest.approx(lp.fun, abs=1e-6)


def test_parseval(poly12):
    for n in (1, 4, 9, 13):
        assert best_approx(poly12, n, S21).value == pytest.approx(parseval_en(poly12, n), abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 12), st.lists(st.floats(-3, 3), min_size=1, max_size=12))
def test_shift_invariance(n, coeffs):
    f = TrialFamily.standard()["abs32"]
    P = FuncRep.monomial(coeffs[:n])
    for sp in (S21, WeightedSpace("inf", 1)):
        assert best_approx(f + P, n, sp).value == pytest.approx(best_approx(f, n, sp).value, abs=1e-9)


@pytest.mark.parametrize("space", [S21, WeightedSpace("inf", 1), WeightedSpace(1, 1)])
def test_nonincreasing_in_n(space):
    f = TrialFamily.standard()["quarter"]
    E = [best_approx(f, n, space).value for n in range(1, 16)]
    assert all(b <= a + 1e-12 for a, b in zip(E, E[1:]))


def test_rejects_bad_n():
    with pytest.raises(ValidationError):
        best_approx(X2, 0, S21)


def test_solver_config_passthrough():
    res = best_approx(X2, 2, SUP0, SolverConfig(grid_size=256))
    assert res.value == pytest.approx(0.5)


# polynomial inequalities


def test_bernstein_constant():
    d, _ = bernstein_markov_probe(FuncRep.constant(1.0), S21)
    assert d == 0


@pytest.mark.parametrize("space", [WeightedSpace(2, 0), WeightedSpace("inf", 0), S21])
def test_bernstein_bounded_over_Rn(space):
    rows = np.array(
        [bernstein_markov_probe(R(n), space) + (markov_corollary_ratio(R(n), space),) for n in range(1, 33)]
    )
    assert np.all(np.isfinite(rows)) and np.all(rows > 0)
    assert np.max(rows) < 5


def test_corollary_on_Rn():
    # D R_n = -n(n+5) R_n, and with n' = n+1: n(n+5)/(n+1)^2
    for n in (1, 4, 10):
        assert markov_corollary_ratio(R(n), S21) == pytest.approx(n * (n + 5) / (n + 1) ** 2, rel=1e-9)


def test_bernstein_guards():
    with pytest.raises(RegimeError):
        bernstein_markov_probe(R(2), WeightedSpace(2, -1))
    with pytest.raises(ValidationError):
        bernstein_markov_probe(FuncRep.from_callable(np.exp), S21)
    with pytest.raises(ValidationError):
        bernstein_markov_probe(R(4), S21, n=2)


def test_en_from_D_polynomial_exact():
    E, bound = en_from_D_bound(R(5), 1, 7, S21)
    assert E < 1e-12 and bound > 0


def test_en_from_D_ratio_bounded():
    f = R(8)
    ratios = []
    for n in (2, 4, 8):
        E, bound = en_from_D_bound(f, 1, n, S21)
        ratios.append(E / bound)
    assert max(ratios) < 1.0
    g = FuncRep.jacobi([0] + [k**-4.0 for k in range(1, 11)])
    ratios = [a / b for a, b in (en_from_D_bound(g, 1, n, S21) for n in range(1, 17))]
    assert max(ratios) < 1.0


def test_en_from_D_guards():
    with pytest.raises(ValidationError):
        en_from_D_bound(FuncRep.from_callable(np.exp), 1, 3, S21)
    with pytest.raises(RegimeError):
        en_from_D_bound(R(3), 1, 3, WeightedSpace(2, 3))
