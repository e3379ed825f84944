import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from smoothness_lab.core import FuncRep, NumericalError, RegimeError, ValidationError, WeightedSpace, weighted_norm
from smoothness_lab.jacobi import apply_D, eval_R, to_jacobi
from smoothness_lab.smoothness import (
    SLWeight,
    H_apply,
    H_delta_apply,
    H_integral,
    h_multipliers,
    k_functional,
    kappa,
    lemma5_rhs,
    modulus,
    series_norms,
)
from smoothness_lab.translation import DifferenceRequest, difference_r, translate, y_poly
from smoothness_lab.verify import TrialFamily, random_poly

from conftest import R

X = np.linspace(-0.95, 0.95, 17)
S21 = WeightedSpace(2, 1)


# kappa and the Sturm-Liouville weight


def kappa_oracle(d, w):
    return integrate.dblquad(lambda u, v: w(u) / w(v), 0, d, 0, lambda v: v, epsabs=1e-13, epsrel=1e-12)[0]


@pytest.mark.parametrize("d", [0.05, 0.5, 1.5, 2.5])
def test_kappa_matches_double_quad(d):
    w = SLWeight()
    assert kappa(d) == pytest.approx(kappa_oracle(d, w), rel=1e-9)


def test_kappa_small_delta():
    # A(u) ~ u/2 near 0 gives kappa ~ delta^2 / 4
    assert kappa(0.01) / 1e-4 == pytest.approx(0.25, rel=5e-3)
    assert SLWeight().kappa_limit == 0.25
    assert SLWeight(2, 2).kappa_limit == pytest.approx(1 / 12)


def test_kappa_increasing_and_lower_bound():
    d = np.linspace(0.01, math.pi / 2, 60)
    k = np.array([kappa(v) for v in d])
    assert np.all(np.diff(k) > 0)
    assert np.min(k / d**2) >= 0.25


def test_kappa_rejects():
    with pytest.raises(ValidationError):
        kappa(0.0)
    with pytest.raises(ValidationError):
        kappa(math.pi)


def test_weight_shape():
    w = SLWeight()
    t = np.linspace(0.1, 3.0, 7)
    assert w(0.0) == 0
    assert np.all(w(t) > 0)
    assert np.allclose(w.ratio(t[:-1], t[1:]), w(t[:-1]) / w(t[1:]))
    inner = [integrate.quad(w, 0, v)[0] for v in t]
    assert np.allclose(w.inner(t), inner, rtol=1e-12)


@pytest.mark.parametrize("t", [0.4, 1.0, 2.2])
def test_lemma5(t):
    f = random_poly(8, 7)
    lhs = translate(f, t, X) - f(X)
    assert np.max(np.abs(lhs - lemma5_rhs(f, t, X))) < 1e-6
    assert np.allclose(lemma5_rhs(f, -t, X), lemma5_rhs(f, t, X), atol=1e-9)


def test_lemma5_fails_for_symmetric_weight():
    f = random_poly(8, 7)
    lhs = translate(f, 1.0, X) - f(X)
    assert np.max(np.abs(lhs - lemma5_rhs(f, 1.0, X, SLWeight(2, 2)))) > 1e-2


# H


def test_H_of_constant():
    assert np.allclose(H_apply(FuncRep.constant(1.0))(X), 0)
    assert np.allclose(H_apply(FuncRep.constant(1.0), method="integral")(X), 0, atol=1e-15)


def test_H_of_R1():
    assert np.allclose(H_apply(R(1))(X), -X / 6)
    assert np.allclose(H_integral(R(1), X), -X / 6, atol=1e-14)


@pytest.mark.parametrize("n", range(1, 9))
def test_H_of_Rn(n):
    expected = (eval_R(n, 2, 2, 0.0) - eval_R(n, 2, 2, X)) / (n * (n + 5))
    assert np.allclose(H_apply(R(n))(X), expected, atol=1e-12)
    assert np.allclose(H_apply(R(n), method="integral")(X), expected, atol=1e-7)


def test_H_integral_edge_guard():
    with pytest.raises(ValidationError):
        H_integral(R(2), np.array([0.5, 1.0]))


def test_H_integral_degree_guard():
    with pytest.raises(ValidationError):
        H_integral(R(65), 0.5)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_DrHr(poly12, r):
    mean = to_jacobi(poly12).coeffs[0]
    for method in ("multiplier", "integral"):
        resid = apply_D(H_apply(poly12, r, method), r=r) - (poly12 - FuncRep.constant(mean))
        assert weighted_norm(resid, S21) < 1e-7


def test_DlHr(poly12):
    H3 = H_apply(poly12, 3)
    for l in (1, 2):
        Hl = H_apply(poly12, 3 - l)
        c = to_jacobi(Hl).coeffs[0]
        resid = apply_D(H3, r=l) - Hl + FuncRep.constant(c)
        assert weighted_norm(resid, S21) < 1e-7


def test_H_needs_positive_r():
    with pytest.raises(ValidationError):
        H_apply(R(1), 0)


def test_H_bounded_on_trials():
    fam = TrialFamily.standard()
    for sp in (WeightedSpace(2, 1), WeightedSpace(2, 0), WeightedSpace(1, 1.5)):
        ratios = []
        for name, f in fam:
            Hf = H_apply(f, degree=256)
            nf = weighted_norm(f, sp, 256)
            if nf > 0:
                ratios.append(weighted_norm(Hf, sp, 256) / nf)
        assert max(ratios) < 1.0


# H_delta


def test_H_delta_of_constant():
    assert np.allclose(H_delta_apply(FuncRep.constant(1.0), 0.5)(X), 1.0)
    assert np.allclose(H_delta_apply(FuncRep.constant(1.0), 0.5, method="integral")(X), 1.0, atol=1e-12)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_H_delta_multiplier_coefficient(n):
    d = 0.6
    h = (1 - y_poly(n, math.cos(d))) / (n * (n + 5) * kappa(d))
    assert h_multipliers(n, d)[n] == pytest.approx(h)
    got = to_jacobi(H_delta_apply(R(n), d, method="integral")).coeffs
    assert got[n] == pytest.approx(h, abs=1e-10)
    assert np.max(np.abs(np.delete(got, n))) < 1e-10


@pytest.mark.parametrize("r", [1, 2])
@pytest.mark.parametrize("d", [0.3, 0.8])
def test_lemma12(poly12, r, d):
    mean = to_jacobi(poly12).coeffs[0]
    Hd = H_delta_apply(poly12, d, r, "integral")
    req = DifferenceRequest(r, (d,) * r)
    rhs = difference_r(H_apply(poly12, r), req, X) / kappa(d) ** r + mean
    assert np.max(np.abs(Hd(X) - rhs)) < 1e-6
    lhs = apply_D(Hd, r=r)(X)
    assert np.max(np.abs(lhs - difference_r(poly12, req, X) / kappa(d) ** r)) < 1e-6


def test_H_delta_paths_agree(poly12):
    probe = np.linspace(-0.9, 0.9, 16)
    for d in (0.2, 0.9, 1.6):
        a = H_delta_apply(poly12, d, method="integral")(probe)
        b = H_delta_apply(poly12, d)(probe)
        assert np.max(np.abs(a - b)) < 1e-5


def test_H_delta_callable_single_level():
    f = FuncRep.from_callable(np.exp)
    g = H_delta_apply(f, 0.4, method="integral")
    h = H_delta_apply(f, 0.4, degree=40)
    assert np.allclose(g(X), h(X), atol=1e-10)


def test_H_delta_converges_to_identity():
    f = TrialFamily.standard()["abs32"]
    errs = [weighted_norm(H_delta_apply(f, d, degree=512) - f, S21, 256) for d in (0.2, 0.1, 0.05)]
    assert errs[0] > errs[1] > errs[2]


# modulus


def test_modulus_of_constant():
    for r in (1, 2, 3):
        assert modulus(FuncRep.constant(2.0), r, 0.7, S21).value == pytest.approx(0, abs=1e-14)


@pytest.mark.parametrize("p", [1, 2, 3, "inf"])
def test_modulus_of_R1(p):
    sp = WeightedSpace(p, 1)
    nx = weighted_norm(R(1), sp, 512)
    for d in (0.1, 0.6, 1.2):
        res = modulus(R(1), 1, d, sp)
        # Delta_t R_1 = 3 x (cos t - 1), largest at t = delta
        assert res.value == pytest.approx(3 * (1 - math.cos(d)) * nx, rel=1e-4)
        assert res.argmax_t == (pytest.approx(d),)


def test_modulus_result_fields():
    res = modulus(R(3), 2, 0.5, S21, t_grid_size=6)
    assert res.r == 2 and res.delta == 0.5 and res.grid_size == 12
    assert all(0 <= t <= 0.5 for t in res.argmax_t)
    assert res.refinement_change <= 0.02


def test_modulus_quadrature_path_agrees():
    f = random_poly(6, 9)
    a = modulus(f, 1, 0.7, S21, t_grid_size=4).value
    b = modulus(f, 1, 0.7, S21, t_grid_size=4, method="quadrature").value
    assert a == pytest.approx(b, rel=1e-8)


def test_modulus_monotone_in_delta():
    f = TrialFamily.standard()["abs32"]
    vals = [modulus(f, 2, d, S21).value for d in (0.05, 0.1, 0.2, 0.4, 0.8)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_modulus_flags_oscillation():
    f = R(60)
    with pytest.raises(NumericalError, match="oscillatory"):
        modulus(f, 1, 1.0, S21, t_grid_size=2)


def test_modulus_rejects():
    with pytest.raises(RegimeError):
        modulus(R(1), 1, 0.3, WeightedSpace(2, 0))
    with pytest.raises(ValidationError):
        modulus(R(1), 4, 0.3, S21)
    with pytest.raises(ValidationError):
        modulus(R(1), 1, 3.5, S21)
    assert modulus(R(1), 1, 0.0, S21).value == 0


def test_smoothness_bound():
    # omega_r(g, d) cos^{4r}(d/2) / (d^{2r} ||D^r g||) bounded over polynomials
    ratios = []
    for g in [R(n) for n in (1, 3, 6, 10)] + [random_poly(10)]:
        for r in (1, 2):
            Drg = weighted_norm(apply_D(g, r=r), S21)
            for d in (0.1, 0.5, 1.0):
                om = modulus(g, r, d, S21).value
                ratios.append(om * math.cos(d / 2) ** (4 * r) / (d ** (2 * r) * Drg))
    assert max(ratios) < 1.0


def test_series_norms_batch(rng):
    c = rng.standard_normal((9, 4))
    for sp in (S21, WeightedSpace("inf", 1), WeightedSpace(3, 1)):
        got = series_norms(c, sp)
        for k in range(4):
            assert got[k] == pytest.approx(weighted_norm(FuncRep.jacobi(c[:, k]), sp, 512), rel=1e-5)


# K-functional


@pytest.mark.parametrize("p", [1, 2, 3, "inf"])
def test_K_of_R1_not_worse_than_ray(p):
    sp = WeightedSpace(p, 1)
    nx = weighted_norm(R(1), sp, 512)
    for d in (0.1, 0.3, 1.0):
        res = k_functional(R(1), 1, d, sp)
        assert res.value <= min(1, 6 * d * d) * nx * (1 + 1e-6)
        assert res.value == pytest.approx(sum(res.split))


def test_K_p2_matches_ray_for_R1():
    nx = weighted_norm(R(1), S21)
    for d in (0.1, 0.3, 1.0):
        assert k_functional(R(1), 1, d, S21).value == pytest.approx(min(1, 6 * d * d) * nx, rel=1e-9)


def test_K_feasible_point_bound(poly12):
    for r in (1, 2):
        for d in (0.1, 0.4):
            bound = d ** (2 * r) * weighted_norm(apply_D(poly12, r=r), S21)
            assert k_functional(poly12, r, d, S21).value <= bound * (1 + 1e-9)


def test_K_at_zero_delta(poly12):
    for sp in (S21, WeightedSpace("inf", 1)):
        assert k_functional(poly12, 1, 0.0, sp).value < 1e-8


def test_K_certified_and_minimizer():
    f = TrialFamily.standard()["abs32"]
    res = k_functional(f, 1, 0.2, WeightedSpace("inf", 1))
    assert res.certified
    assert res.value <= res.half_degree_value
    assert res.minimizer.degree <= res.search_degree


def test_K_general_p_against_discrete_objective():
    f = TrialFamily.standard()["exp"]
    sp = WeightedSpace(3, 1)
    res = k_functional(f, 1, 0.3, sp)
    g = res.minimizer
    obj = weighted_norm(f - g, sp, 512) + 0.3**2 * weighted_norm(apply_D(g), sp, 512)
    assert res.value == pytest.approx(obj, rel=1e-6)


def test_K_rejects():
    with pytest.raises(ValidationError):
        k_functional(R(1), 1, 0.3, S21, search_degree=3)
    with pytest.raises(RegimeError):
        k_functional(R(1), 1, 0.3, WeightedSpace(1, 2))


@settings(max_examples=10, deadline=None)
@given(st.floats(0.05, 1.4), st.floats(0.05, 1.4))
def test_K_monotone_in_delta(d1, d2):
    f = TrialFamily.standard()["abs32"]
    lo, hi = sorted((d1, d2))
    assert k_functional(f, 1, lo, S21).value <= k_functional(f, 1, hi, S21).value + 1e-12
