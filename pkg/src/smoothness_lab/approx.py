"""Best weighted polynomial approximation E_n(f)_{p,alpha} (degree <= n-1) and polynomial inequalities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import optimize

from .core import (
    FuncRep,
    NumericalError,
    Regime,
    ValidationError,
    WeightedSpace,
    as_cheb,
    as_funcrep,
    lp_from_samples,
    norm_nodes,
    norm_order,
    sup_grid,
    sup_weights,
    weighted_norm,
)
from .jacobi import apply_D, norm_sq, to_jacobi


@dataclass(frozen=True)
class SolverConfig:
    grid_size: int = 2048
    tol: float = 1e-8
    max_iter: int = 200
    resolution: int = 256
    eps_start: float = 1e-2
    eps_stop: float = 1e-10


@dataclass(frozen=True)
class ApproxResult:
    n: int
    value: float
    poly: FuncRep
    iterations: int
    certified_gap: float = 0.0
    converged: bool = True
    reference: tuple = ()


def _check_n(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    return int(n)


def best_approx(f, n: int, space: WeightedSpace, solver_cfg: SolverConfig | None = None) -> ApproxResult:
    """E_n(f)_{p,alpha}: least squares (p=2), discrete Remez (p=inf) or IRLS (other p)."""
    n = _check_n(n)
    cfg = solver_cfg or SolverConfig()
    f = as_funcrep(f)
    if space.regime is not None:
        space.validate(space.regime)
    if space.is_sup:
        return _remez(f, n, space, cfg)
    if space.p == 2:
        return _least_squares(f, n, space, cfg)
    return _irls(f, n, space, cfg)


def _nodes(f: FuncRep, space: WeightedSpace, cfg: SolverConfig):
    m = norm_order(f, cfg.resolution)
    if f.is_series:
        m = max(m, f.degree + 8)
    return norm_nodes(space, m, f.breakpoints)


def _least_squares(f, n, space, cfg):
    x, w = _nodes(f, space, cfg)
    sw = np.sqrt(w)
    V = C.chebvander(x, n - 1)
    F = f(x)
    # orthonormalize the basis in the discrete weighted inner product
    Q, R = np.linalg.qr(V * sw[:, None])
    coef = Q.T @ (F * sw)
    c = np.linalg.solve(R, coef)
    poly = FuncRep.cheb(c)
    value = float(lp_from_samples(F - V @ c, w, 2))
    return ApproxResult(n, value, poly, 1)


def parseval_en(f, n: int) -> float:
    """E_n(f)_{2,1} from the Jacobi coefficients of a series: sqrt(sum_{k>=n} b_k^2 h_k)."""
    f = as_funcrep(f)
    if not f.is_series:
        raise ValidationError("parseval_en needs a series")
    b = np.asarray(to_jacobi(f).coeffs)
    h = norm_sq(len(b) - 1)
    return float(math.sqrt(np.sum(b[n:] ** 2 * h[n:])))


def _irls(f, n, space, cfg):
    x, w = _nodes(f, space, cfg)
    V = C.chebvander(x, n - 1)
    F = f(x)
    p = space.p
    sw = np.sqrt(w)
    c = np.linalg.lstsq(V * sw[:, None], F * sw, rcond=None)[0]
    obj = float(lp_from_samples(F - V @ c, w, p))
    it = 0
    eps = cfg.eps_start
    while True:
        for _ in range(50):
            res = F - V @ c
            u = w * (res * res + eps * eps) ** ((p - 2) / 2)
            su = np.sqrt(u)
            c_new = np.linalg.lstsq(V * su[:, None], F * su, rcond=None)[0]
            it += 1
            new = float(lp_from_samples(F - V @ c_new, w, p))
            if not math.isfinite(new):
                raise NumericalError("IRLS produced a non-finite objective")
            step = np.max(np.abs(c_new - c))
            c = c_new
            if step <= 1e-13 * max(1.0, np.max(np.abs(c))):
                break
            obj = min(obj, new)
        if eps <= cfg.eps_stop:
            break
        eps = max(eps / 10, cfg.eps_stop)
    value = float(lp_from_samples(F - V @ c, w, p))
    return ApproxResult(n, value, FuncRep.cheb(c), it)


# ---------------------------------------------------------------------------
# weighted discrete Remez exchange


def _alternants(e: np.ndarray, nref: int, keep: int) -> np.ndarray | None:
    """Indices of alternating local extrema of e, trimmed to nref points, containing ``keep``."""
    s = np.sign(e)
    nz = np.nonzero(s)[0]
    if nz.size == 0:
        return None
    idx = []
    start = nz[0]
    for k in range(1, nz.size + 1):
        if k == nz.size or s[nz[k]] != s[start]:
            run = nz[np.searchsorted(nz, start): k]
            idx.append(run[np.argmax(np.abs(e[run]))])
            if k < nz.size:
                start = nz[k]
    idx = list(idx)
    while len(idx) > nref:
        mags = np.abs(e[idx])
        if len(idx) == nref + 1:
            drop = 0 if mags[0] < mags[-1] else len(idx) - 1
            if idx[drop] == keep:
                drop = len(idx) - 1 - drop
            del idx[drop]
            continue
        order = np.argsort(mags)
        k = next(int(j) for j in order if idx[j] != keep)
        if k in (0, len(idx) - 1):
            del idx[k]
        else:
            nb = k - 1 if mags[k - 1] < mags[k + 1] else k + 1
            if idx[nb] == keep:
                nb = k + 1 if nb == k - 1 else k - 1
            for j in sorted((k, nb), reverse=True):
                del idx[j]
    if len(idx) < nref:
        return None
    return np.array(idx)


def _remez(f, n, space, cfg):
    x = sup_grid(cfg.grid_size - 1, space.alpha, f.breakpoints)
    wt = sup_weights(x, space.alpha)
    keep_pts = wt > 0
    x, wt = x[keep_pts], wt[keep_pts]
    F = f(x)
    V = C.chebvander(x, n - 1)
    nref = n + 1
    # interior Chebyshev points: the weight may vanish at +-1
    init = np.cos(np.pi * (np.arange(nref)[::-1] + 0.5) / nref)
    ref = np.unique(np.clip(np.searchsorted(x, init), 0, len(x) - 1))
    if ref.size < nref:
        ref = np.linspace(0, len(x) - 1, nref).round().astype(int)
    signs = (-1.0) ** np.arange(nref)
    best = None
    it = 0
    for it in range(1, cfg.max_iter + 1):
        A = np.column_stack([V[ref], signs / wt[ref]])
        try:
            sol = np.linalg.solve(A, F[ref])
        except np.linalg.LinAlgError:
            break
        c, h = sol[:-1], sol[-1]
        e = wt * (F - V @ c)
        emax = float(np.max(np.abs(e)))
        gap = emax - abs(h)
        cand = (emax, c, gap, ref.copy())
        if best is None or emax < best[0]:
            best = cand
        if emax == 0 or gap <= cfg.tol * emax:
            best = cand
            break
        new = _alternants(e, nref, int(np.argmax(np.abs(e))))
        if new is None or np.array_equal(new, ref):
            break
        ref = new
    emax, c, gap, ref = best
    converged = emax == 0 or gap <= cfg.tol * emax
    xr = x[ref]
    if emax > 0:
        c, xr, value, gap, converged = _continuous_exchange(f, n, space.alpha, x, wt, F, V, c, xr, cfg)
    else:
        value = emax
    return ApproxResult(n, value, FuncRep.cheb(c), it, max(gap, 0.0), converged, tuple(float(v) for v in xr))


def _continuous_exchange(f, n, alpha, x, wt, F, V, c, xr, cfg):
    """Move the discrete reference onto the true local extrema (the grid misses them by O(h^2))."""

    def err(t, c):
        tt = np.atleast_1d(t)
        return sup_weights(tt, alpha) * (f(tt) - C.chebval(tt, c))

    signs = (-1.0) ** np.arange(len(xr))
    value, gap = np.inf, np.inf
    for _ in range(10):
        A = np.column_stack([C.chebvander(xr, n - 1), signs / sup_weights(xr, alpha)])
        try:
            sol = np.linalg.solve(A, f(xr))
        except np.linalg.LinAlgError:
            break
        c_new, h = sol[:-1], sol[-1]
        s = np.sign(h) * signs
        mids = np.r_[-1.0, 0.5 * (xr[1:] + xr[:-1]), 1.0]
        moved = np.empty_like(xr)
        peaks = np.empty_like(xr)
        for i in range(len(xr)):
            lo, hi = max(mids[i], x[0]), min(mids[i + 1], x[-1])
            res = optimize.minimize_scalar(
                lambda t: -s[i] * err(t, c_new)[0], bounds=(lo, hi), method="bounded", options={"xatol": 1e-14}
            )
            moved[i], peaks[i] = (res.x, -res.fun) if -res.fun >= abs(h) else (xr[i], abs(h))
        grid_max = float(np.max(np.abs(wt * (F - V @ c_new))))
        new_value = max(float(np.max(peaks)), grid_max)
        if new_value > value:
            break
        c, value, gap = c_new, new_value, new_value - abs(h)
        if gap <= 1e-12 * value or np.array_equal(moved, xr):
            xr = moved
            break
        xr = moved
    if not np.isfinite(value):
        # fall back to the discrete solution, polished
        value = max(float(np.max(np.abs(wt * (F - V @ c)))), float(np.max(np.abs(err(xr, c)))))
        gap = value
    return c, xr, value, gap, gap <= cfg.tol * value


def alternation(result: ApproxResult, f, space: WeightedSpace, tol: float = 1e-6):
    """Points of the reference where the weighted error alternates in sign at level value +- tol."""
    f = as_funcrep(f)
    x = np.asarray(result.reference)
    e = sup_weights(x, space.alpha) * (f(x) - result.poly(x))
    ok = np.abs(np.abs(e) - result.value) <= tol
    alt = np.all(np.sign(e[1:]) == -np.sign(e[:-1]))
    return bool(alt and ok.all() and len(x) >= result.n + 1), x, e


# ---------------------------------------------------------------------------
# polynomial inequalities


def _poly_degree_n(P: FuncRep, n: int | None) -> tuple[FuncRep, int]:
    P = as_funcrep(P)
    if not P.is_series:
        raise ValidationError("P must be a polynomial series")
    Pc = as_cheb(P)
    deg = Pc.degree
    n = deg + 1 if n is None else int(n)
    if n < deg + 1:
        raise ValidationError(f"P has degree {deg}, so n must be >= {deg + 1}")
    return Pc, n


def bernstein_markov_probe(P, space: WeightedSpace, rho: float = 0.5, n: int | None = None):
    """(||P'||_{p,a+1/2} / (n ||P||_{p,a}), ||P||_{p,a} / (n^(2 rho) ||P||_{p,a+rho})) with deg P <= n-1."""
    space.validate(Regime.BERNSTEIN_MARKOV)
    if rho <= 0:
        raise ValidationError("rho must be positive")
    Pc, n = _poly_degree_n(P, n)
    base = weighted_norm(Pc, space, 256)
    if base == 0:
        raise ValidationError("P vanishes identically")
    dP = FuncRep.cheb(C.chebder(Pc.coeffs) if Pc.degree > 0 else [0.0])
    d = weighted_norm(dP, WeightedSpace(space.p, space.alpha + 0.5), 256) / (n * base)
    shifted = weighted_norm(Pc, WeightedSpace(space.p, space.alpha + rho), 256)
    return float(d), float(base / (n ** (2 * rho) * shifted))


def markov_corollary_ratio(P, space: WeightedSpace, n: int | None = None) -> float:
    """||D P||_{p,a} / (n^2 ||P||_{p,a}) with D = D_{x,2,2}."""
    space.validate(Regime.BERNSTEIN_MARKOV)
    Pc, n = _poly_degree_n(P, n)
    base = weighted_norm(Pc, space, 256)
    if base == 0:
        raise ValidationError("P vanishes identically")
    DP = apply_D(Pc) if Pc.degree > 0 else FuncRep.cheb([0.0])
    return float(weighted_norm(DP, space, 256) / (n * n * base))


def en_from_D_bound(f, r: int, n: int, space: WeightedSpace, solver_cfg: SolverConfig | None = None):
    """(E_n(f), n^(-2r) ||D^r f||) for a polynomial f."""
    space.validate(Regime.ED)
    n = _check_n(n)
    if isinstance(r, bool) or int(r) != r or r < 1:
        raise ValidationError(f"r must be a positive integer, got {r!r}")
    f = as_funcrep(f)
    if not f.is_series:
        raise ValidationError("f must be a polynomial series")
    E = best_approx(f, n, space, solver_cfg).value
    bound = n ** (-2.0 * r) * weighted_norm(apply_D(f, r=int(r)), space, 256)
    return float(E), float(bound)
