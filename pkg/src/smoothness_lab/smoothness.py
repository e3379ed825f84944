"""Generalized moduli of smoothness, the K-functional, and the inverse operators H, H_delta."""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .core import (
    INF,
    FuncRep,
    NumericalError,
    Regime,
    ValidationError,
    WeightedSpace,
    _gauss_jacobi,
    as_funcrep,
    cheb_interior,
    lp_from_samples,
    mapped_legendre,
    norm_nodes,
    sup_grid,
    sup_weights,
)
from .jacobi import NU, MU, eigenvalue, jacobi_eval, jacobi_table, norm_sq, to_jacobi
from .translation import (
    DEFAULT_CONFIG,
    DifferenceRequest,
    TranslationConfig,
    difference_r,
    translate,
    y_multipliers,
)

C0 = 16.0 / 15.0  # int (1-z^2)^2 dz
H_EDGE = 1e-8


# ---------------------------------------------------------------------------
# Sturm-Liouville weight and kappa


@dataclass(frozen=True)
class SLWeight:
    """A(t) = sin^(2a+1)(t/2) cos^(2b+1)(t/2).

    The pair (a, b) must be the Jacobi parameters of the y-side eigenvalue
    polynomials, so the default is (0, 4): A(t) = sin(t/2) cos^9(t/2).
    """

    a: float = 0.0
    b: float = 4.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.sin(t / 2) ** (2 * self.a + 1) * np.cos(t / 2) ** (2 * self.b + 1)

    def ratio(self, u, v):
        """A(u) / A(v), stable as u, v -> 0."""
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        s = (np.sin(u / 2) / np.sin(v / 2)) ** (2 * self.a + 1)
        c = (np.cos(u / 2) / np.cos(v / 2)) ** (2 * self.b + 1)
        return s * c

    def inner(self, v):
        """int_0^v A(u) du = int_0^{sin^2(v/2)} s^a (1-s)^b ds."""
        a, b = self.a + 1, self.b + 1
        return special.beta(a, b) * special.betainc(a, b, np.sin(np.asarray(v, dtype=float) / 2) ** 2)

    @property
    def kappa_limit(self) -> float:
        """lim kappa(delta) / delta^2."""
        return 1.0 / (4 * (self.a + 1))


DEFAULT_WEIGHT = SLWeight()


def kappa(delta: float, weight: SLWeight = DEFAULT_WEIGHT, order: int = 64) -> float:
    """kappa(delta) = int_0^delta A(v)^-1 int_0^v A(u) du dv."""
    delta = float(delta)
    if not 0 < delta < math.pi:
        raise ValidationError(f"delta must lie in (0, pi), got {delta}")
    v, w = mapped_legendre(0.0, delta, order)
    return float(w @ (weight.inner(v) / weight(v)))


# ---------------------------------------------------------------------------
# helpers


def _jacobi_coeffs(f, degree: int | None) -> np.ndarray:
    return np.array(to_jacobi(as_funcrep(f), degree).coeffs)


def _mean(f: FuncRep, degree: int | None = None) -> float:
    """c_1 / c_0 for f."""
    return float(_jacobi_coeffs(f, degree)[0])


def _series_degree(f: FuncRep, degree: int | None) -> int:
    if f.is_series:
        return f.degree
    if degree is None:
        raise ValidationError("a callable must be interpolated first: pass degree")
    return int(degree)


def _check_r(r, allowed=None):
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise ValidationError(f"r must be a positive integer, got {r!r}")
    if allowed is not None and r not in allowed:
        raise ValidationError(f"r must be one of {sorted(allowed)}, got {r}")
    return int(r)


# ---------------------------------------------------------------------------
# H


def _inner_H(F: FuncRep, y: np.ndarray, m: int) -> np.ndarray:
    """(1-y^2)^-3 int_y^1 F(z) (1-z^2)^2 dz, where F has zero weighted mean.

    Gauss-Jacobi on [y, 1] with weight (1-z)^2 extracts the factor (1-y)^3
    exactly; y < 0 uses the mirrored integral over [-1, y].
    """
    y = np.asarray(y, dtype=float)
    out = np.empty(y.shape)
    pos = y >= 0
    s, w = _gauss_jacobi(m, 2.0, 0.0)
    if np.any(pos):
        yp = y[pos][..., None]
        z = yp + (1 - yp) * (s + 1) / 2
        out[pos] = (F(z) * (1 + z) ** 2) @ w / (8 * (1 + yp[..., 0]) ** 3)
    if np.any(~pos):
        s2, w2 = _gauss_jacobi(m, 0.0, 2.0)
        yn = y[~pos][..., None]
        z = -1 + (1 + yn) * (s2 + 1) / 2
        out[~pos] = -((F(z) * (1 - z) ** 2) @ w2) / (8 * (1 - yn[..., 0]) ** 3)
    return out


def H_integral(f, x, degree: int | None = None, order: int = 64) -> np.ndarray:
    """H(f, x) = -int_0^x (1-y^2)^-3 int_y^1 (f(z) - c1/c0)(1-z^2)^2 dz dy, by quadrature."""
    f = as_funcrep(f)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1 - H_EDGE):
        raise ValidationError(f"H integral is evaluated only for |x| <= 1 - {H_EDGE:g}")
    n = _series_degree(f, degree)
    if n > 64 and f.is_series:
        raise ValidationError("the integral method takes series of degree <= 64")
    c = _mean(f, degree)
    F = FuncRep.from_callable(lambda z: f(z) - c)
    m = max(n // 2 + 4, 8)
    y, w = mapped_legendre(np.zeros_like(x), x, order)
    return -np.sum(w * _inner_H(F, y, m), axis=-1)


def _H_multiplier_coeffs(b: np.ndarray) -> np.ndarray:
    n = np.arange(len(b))
    out = np.zeros_like(b)
    out[1:] = b[1:] / eigenvalue(n[1:])
    out[0] = -float(jacobi_eval(out, NU, MU, 0.0))
    return out


def H_apply(f, r: int = 1, method: str = "multiplier", degree: int | None = None) -> FuncRep:
    """H^r f; each application recenters its argument by its own weighted mean.

    ``multiplier`` returns a Jacobi series; ``integral`` evaluates the nested
    integral at interior Chebyshev points (exact for polynomials) and returns the
    Chebyshev interpolant.
    """
    r = _check_r(r)
    f = as_funcrep(f)
    if method == "multiplier":
        b = _jacobi_coeffs(f, degree)
        for _ in range(r):
            b = _H_multiplier_coeffs(b)
        return FuncRep.jacobi(b, name=f"H^{r}({f.name})")
    if method != "integral":
        raise ValidationError(f"unknown method {method!r}")
    n = _series_degree(f, degree)
    g = f if f.is_series else cheb_interior(f, n)
    for _ in range(r):
        g = cheb_interior(functools.partial(H_integral, g), max(n, 1))
    return g


# ---------------------------------------------------------------------------
# H_delta


def h_multipliers(N: int, delta: float, weight: SLWeight = DEFAULT_WEIGHT) -> np.ndarray:
    """Fourier multipliers h_n(delta) of H_delta, n = 0..N."""
    n = np.arange(N + 1)
    q = y_multipliers(N, [delta])[:, 0]
    out = np.ones(N + 1)
    out[1:] = (1 - q[1:]) / (-eigenvalue(n[1:]) * kappa(delta, weight))
    return out


def _check_delta(delta):
    delta = float(delta)
    if not 0 < delta < math.pi:
        raise ValidationError(f"delta must lie in (0, pi), got {delta}")
    return delta


def H_delta_integral(
    f,
    delta: float,
    x,
    weight: SLWeight = DEFAULT_WEIGHT,
    cfg: TranslationConfig = DEFAULT_CONFIG,
    order: int = 32,
) -> np.ndarray:
    """(1/kappa) int_0^delta A(v)^-1 int_0^v tau-hat_u(f, x) A(u) du dv by nested Gauss-Legendre."""
    delta = _check_delta(delta)
    f = as_funcrep(f)
    v, wv = mapped_legendre(0.0, delta, order)
    u, wu = mapped_legendre(np.zeros(order), v, order)  # (order, order)
    wts = wv[:, None] * wu * weight.ratio(u, v[:, None])
    param = u if cfg.form == "t_form" else np.cos(u)
    tau = translate(f, param, x, cfg)  # (order, order, *x.shape)
    total = np.tensordot(wts, tau, axes=([0, 1], [0, 1]))
    return total / kappa(delta, weight)


def H_delta_apply(
    f,
    delta: float,
    r: int = 1,
    method: str = "multiplier",
    weight: SLWeight = DEFAULT_WEIGHT,
    degree: int | None = None,
    cfg: TranslationConfig = DEFAULT_CONFIG,
) -> FuncRep:
    """H_delta^r f. The integral path re-interpolates at interior Chebyshev points between levels."""
    r = _check_r(r)
    delta = _check_delta(delta)
    f = as_funcrep(f)
    if method == "multiplier":
        b = _jacobi_coeffs(f, degree)
        return FuncRep.jacobi(b * h_multipliers(len(b) - 1, delta, weight) ** r, name=f"Hd^{r}({f.name})")
    if method != "integral":
        raise ValidationError(f"unknown method {method!r}")
    if r == 1 and not f.is_series and degree is None:
        return FuncRep.from_callable(lambda x: H_delta_integral(f, delta, x, weight, cfg))
    n = _series_degree(f, degree)
    g = f
    for _ in range(r):
        g = cheb_interior(functools.partial(H_delta_integral, g, delta, weight=weight, cfg=cfg), max(n, 1))
    return g


def lemma5_rhs(f, t: float, x, weight: SLWeight = DEFAULT_WEIGHT, cfg: TranslationConfig = DEFAULT_CONFIG, order: int = 32):
    """int_0^t A(v)^-1 int_0^v tau-hat_u(D f, x) A(u) du dv (equals tau-hat_t f - f)."""
    from .jacobi import apply_D

    f = as_funcrep(f)
    Df = apply_D(f)
    t = float(t)
    if t == 0:
        return np.zeros(np.shape(x))
    sgn = 1.0 if t > 0 else -1.0
    v, wv = mapped_legendre(0.0, abs(t), order)
    u, wu = mapped_legendre(np.zeros(order), v, order)
    wts = wv[:, None] * wu * weight.ratio(u, v[:, None])
    param = sgn * u if cfg.form == "t_form" else np.cos(u)
    tau = translate(Df, param, x, cfg)
    return np.tensordot(wts, tau, axes=([0, 1], [0, 1]))


# ---------------------------------------------------------------------------
# modulus of smoothness


@dataclass(frozen=True)
class ModulusResult:
    value: float
    argmax_t: tuple
    grid_size: int
    r: int
    delta: float
    refinement_change: float = 0.0


def spectral_degree(space: WeightedSpace) -> int:
    """Default truncation degree for non-polynomial inputs."""
    return 2048 if space.is_sup else 1024


@functools.lru_cache(maxsize=8)
def _synthesis(N: int, p: float, alpha: float):
    """(V, weights) with V[n, i] = R_n(x_i) on nodes suited to ||.||_{p,alpha} of degree-N polynomials."""
    if p == INF:
        x = sup_grid(2 * N + 1, alpha)
        w = sup_weights(x, alpha)
    else:
        x, w = _gauss_jacobi(N + 1, p * alpha, p * alpha)
    V = jacobi_table(N, NU, MU, x)
    V.setflags(write=False)
    return V, w


def series_norms(coeffs: np.ndarray, space: WeightedSpace) -> np.ndarray:
    """||sum_n coeffs[n, k] R_n||_{p,alpha} for every column k."""
    coeffs = np.asarray(coeffs, dtype=float)
    single = coeffs.ndim == 1
    c = coeffs[:, None] if single else coeffs
    N = c.shape[0] - 1
    if space.p == 2 and space.alpha == 1:
        out = np.sqrt(np.maximum(norm_sq(N)[:, None] * c * c, 0).sum(axis=0))
    else:
        # low degrees still get a fine grid: |.| and sup are not polynomial
        V, w = _synthesis(max(N, 512), space.p, space.alpha)
        vals = V[: N + 1].T @ c
        out = lp_from_samples(vals, w, space.p)
    return out[0] if single else out


def modulus(
    f,
    r: int,
    delta: float,
    space: WeightedSpace,
    t_grid_size: int = 12,
    x_resolution: int = 64,
    method: str = "spectral",
    degree: int | None = None,
    cfg: TranslationConfig = DEFAULT_CONFIG,
) -> ModulusResult:
    """omega_r(f, delta)_{p,alpha}: max of ||Delta^r_t f|| over t in {0, d/g, .., d}^r.

    The grid is refined once (g -> 2g); a relative change above 2% raises.
    """
    space.validate(Regime.DIRECT_INVERSE)
    r = _check_r(r, {1, 2, 3})
    delta = float(delta)
    if not 0 <= delta < math.pi:
        raise ValidationError(f"delta must lie in [0, pi), got {delta}")
    if t_grid_size < 1:
        raise ValidationError("t_grid_size must be positive")
    if delta == 0:
        return ModulusResult(0.0, (0.0,) * r, t_grid_size, r, delta)
    f = as_funcrep(f)
    fine = np.linspace(0, delta, 2 * t_grid_size + 1)
    idx = np.array(list(itertools.combinations_with_replacement(range(len(fine)), r)))
    if method == "spectral":
        if not f.is_series and degree is None:
            degree = spectral_degree(space)
        b = _jacobi_coeffs(f, degree)
        Q = y_multipliers(len(b) - 1, fine) - 1.0
        M = np.prod(Q[:, idx], axis=2)  # (N+1, K)
        vals = series_norms(b[:, None] * M, space)
    elif method == "quadrature":
        x, w = norm_nodes(space, x_resolution, f.breakpoints)
        vals = np.array([
            lp_from_samples(difference_r(f, DifferenceRequest(r, tuple(fine[i])), x, cfg), w, space.p)
            for i in idx
        ])
    else:
        raise ValidationError(f"unknown method {method!r}")
    coarse = np.all(idx % 2 == 0, axis=1)
    v_fine = float(np.max(vals))
    v_coarse = float(np.max(vals[coarse]))
    change = 0.0 if v_fine == 0 else (v_fine - v_coarse) / v_fine
    if change > 0.02:
        raise NumericalError(
            f"modulus grid refinement changed the value by {100 * change:.1f}% (> 2%); f looks oscillatory"
        )
    k = int(np.argmax(vals))
    return ModulusResult(v_fine, tuple(float(t) for t in fine[idx[k]]), 2 * t_grid_size, r, delta, change)


# ---------------------------------------------------------------------------
# K-functional


@dataclass(frozen=True)
class KFunctionalResult:
    value: float
    minimizer: FuncRep
    search_degree: int
    split: tuple[float, float]
    certified: bool = True
    half_degree_value: float = math.nan


def _tikhonov_scan(objective, lo: float, hi: float, n: int = 121):
    """Minimize a scalar objective of log(mu): coarse scan then golden section."""
    grid = np.linspace(lo, hi, n)
    vals = np.array([objective(s) for s in grid])
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, n - 1)]
    res = optimize.minimize_scalar(objective, bracket=None, bounds=(a, b), method="bounded",
                                   options={"xatol": 1e-10})
    return (res.x, res.fun) if res.fun <= vals[k] else (grid[k], vals[k])


def _kfunc_parseval(b, h, lam_r, dr, S):
    """p = 2, alpha = 1: exact in the Jacobi basis; returns (value, coeffs, split)."""
    tail = float(np.sum(h[S + 1:] * b[S + 1:] ** 2))
    bs, hs, ls = b[: S + 1], h[: S + 1], lam_r[: S + 1]

    def parts(c):
        e = math.sqrt(tail + float(np.sum(hs * (bs - c) ** 2)))
        d = dr * math.sqrt(float(np.sum(hs * (c * ls) ** 2)))
        return e, d

    def coeffs(s):
        return bs / (1 + math.exp(s) * ls**2)

    def obj(s):
        return sum(parts(coeffs(s)))

    lmax = max(float(np.max(np.abs(ls))), 1.0)
    s, _ = _tikhonov_scan(obj, -2 * math.log(lmax) - 20, 20)
    cands = [coeffs(s), bs.copy(), np.r_[bs[:1], np.zeros(S)]]
    vals = [sum(parts(c)) for c in cands]
    c = cands[int(np.argmin(vals))]
    return min(vals), c, parts(c)


def _kfunc_discrete(f, S, r, dr, space, resolution):
    x, w = norm_nodes(space, resolution, f.breakpoints)
    F = f(x)
    V = jacobi_table(S, NU, MU, x).T  # (M, S+1)
    lam_r = eigenvalue(np.arange(S + 1)) ** r
    B = V * lam_r
    p = space.p

    def parts(c):
        return float(lp_from_samples(F - V @ c, w, p)), dr * float(lp_from_samples(B @ c, w, p))

    if p == 2 or dr == 0:
        sw = np.sqrt(w)
        A, Fw, Bw = V * sw[:, None], F * sw, B * sw[:, None]

        def coeffs(s):
            mu = math.exp(s / 2)
            lhs = np.vstack([A, mu * Bw])
            return np.linalg.lstsq(lhs, np.r_[Fw, np.zeros(len(Fw))], rcond=None)[0]

        c_ls = np.linalg.lstsq(A, Fw, rcond=None)[0]
        if dr == 0 and p == 2:
            return c_ls, parts(c_ls)
        lmax = max(float(np.max(np.abs(lam_r))), 1.0)
        s, _ = _tikhonov_scan(lambda s: sum(parts(coeffs(s))), -2 * math.log(lmax) - 20, 20, 61)
        cands = [coeffs(s), c_ls]
        if p != 2:
            return _kfunc_lp_or_smooth(F, V, B, w, p, dr, cands, parts)
        c = min(cands, key=lambda c: sum(parts(c)))
        return c, parts(c)
    sw = np.sqrt(w)
    c_ls = np.linalg.lstsq(V * sw[:, None], F * sw, rcond=None)[0]
    return _kfunc_lp_or_smooth(F, V, B, w, p, dr, [c_ls], parts)


def _kfunc_lp_or_smooth(F, V, B, w, p, dr, starts, parts):
    M, n = V.shape
    # g = 0 and the best constant are always feasible
    zero = np.zeros(n)
    const = zero.copy()
    const[0] = optimize.minimize_scalar(lambda a: float(lp_from_samples(F - a, w, p))).x
    starts = list(starts) + [zero, const]
    if p in (1, INF):
        from scipy.optimize import linprog
        from scipy import sparse

        # columns of B can be huge; rescale the unknowns
        scale = 1.0 / np.maximum(1.0, np.max(np.abs(B), axis=0))
        Vs, Bs = V * scale, B * scale
        if p == INF:
            # min s + dr * u,  |w (F - V c)| <= s,  |w B c| <= u
            wV, wB = w[:, None] * Vs, w[:, None] * Bs
            one = np.ones((M, 1))
            zero = np.zeros((M, 1))
            A_ub = np.block([[-wV, -one, zero], [wV, -one, zero], [wB, zero, -one], [-wB, zero, -one]])
            b_ub = np.r_[-w * F, w * F, np.zeros(2 * M)]
            cost = np.r_[np.zeros(n), 1.0, dr]
        else:
            # min sum w e + dr sum w d,  |F - V c| <= e,  |B c| <= d
            I = sparse.identity(M, format="csr")
            Z = sparse.csr_matrix((M, M))
            A_ub = sparse.vstack([
                sparse.hstack([-sparse.csr_matrix(Vs), -I, Z]),
                sparse.hstack([sparse.csr_matrix(Vs), -I, Z]),
                sparse.hstack([sparse.csr_matrix(Bs), Z, -I]),
                sparse.hstack([-sparse.csr_matrix(Bs), Z, -I]),
            ]).tocsr()
            b_ub = np.r_[-F, F, np.zeros(2 * M)]
            cost = np.r_[np.zeros(n), w, dr * w]
        bounds = [(None, None)] * n + [(0, None)] * (len(cost) - n)
        res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if res.status != 0:
            raise NumericalError(f"K-functional LP failed: {res.message}")
        c = res.x[:n] * scale
        starts = starts + [c]
    else:
        def obj(c):
            return sum(parts(c))

        def grad(c):
            e = F - V @ c
            g = B @ c
            ne = lp_from_samples(e, w, p)
            ng = lp_from_samples(g, w, p)
            out = np.zeros(n)
            if ne > 0:
                out -= V.T @ (w * np.abs(e) ** (p - 1) * np.sign(e)) / ne ** (p - 1)
            if ng > 0:
                out += dr * B.T @ (w * np.abs(g) ** (p - 1) * np.sign(g)) / ng ** (p - 1)
            return out

        for c0 in sorted(starts, key=obj)[:2]:
            res = optimize.minimize(obj, c0, jac=grad, method="L-BFGS-B",
                                    options={"maxiter": 5000, "ftol": 1e-15, "gtol": 1e-12})
            starts = starts + [res.x]
    c = min(starts, key=lambda c: sum(parts(c)))
    return c, parts(c)


def k_functional(
    f,
    r: int,
    delta: float,
    space: WeightedSpace,
    search_degree: int = 64,
    resolution: int = 512,
    degree: int | None = None,
) -> KFunctionalResult:
    """K(f, delta) = inf_g ||f - g||_{p,alpha} + delta^(2r) ||D^r g||_{p,alpha}, g of degree <= search_degree.

    Solved at search_degree and at search_degree // 2; the smaller value is kept
    (the low-degree minimizer is feasible for the larger problem) and
    ``certified`` records whether the solver already respected that order.
    """
    space.validate(Regime.DIRECT_INVERSE)
    r = _check_r(r)
    if search_degree < 4:
        raise ValidationError("search_degree must be >= 4")
    delta = float(delta)
    if not 0 <= delta < math.pi:
        raise ValidationError(f"delta must lie in [0, pi), got {delta}")
    f = as_funcrep(f)
    dr = delta ** (2 * r)

    def solve(S):
        if space.p == 2 and space.alpha == 1:
            N = max(S, f.degree if f.is_series else spectral_degree(space))
            b = np.zeros(N + 1)
            bb = _jacobi_coeffs(f, None if f.is_series else N)
            b[: len(bb)] = bb
            lam_r = eigenvalue(np.arange(N + 1)) ** r
            val, c, split = _kfunc_parseval(b, norm_sq(N), lam_r, dr, S)
            return val, c, split
        c, split = _kfunc_discrete(f, S, r, dr, space, max(resolution, 4 * S))
        return sum(split), c, split

    v_hi, c_hi, s_hi = solve(search_degree)
    v_lo, c_lo, s_lo = solve(search_degree // 2)
    certified = v_hi <= v_lo * (1 + 1e-9) + 1e-15
    if v_lo < v_hi:
        v_hi, c_hi, s_hi = v_lo, c_lo, s_lo
    g = FuncRep.jacobi(c_hi, name="K-minimizer")
    return KFunctionalResult(float(v_hi), g, search_degree, (float(s_hi[0]), float(s_hi[1])), certified, float(v_lo))
