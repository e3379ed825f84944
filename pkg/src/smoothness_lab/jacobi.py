"""Jacobi polynomials normalized by R_n(1) = 1, Fourier-Jacobi analysis and D_{x,nu,mu}."""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C

from .core import (
    FuncRep,
    NumericalError,
    ValidationError,
    _gauss_jacobi,
    as_funcrep,
    to_cheb,
    weighted_rule,
)

# The unadorned P_n and D_x of the theory use the ultraspherical pair (2, 2).
NU, MU = 2.0, 2.0


@functools.lru_cache(maxsize=32)
def _recurrence(nmax: int, a: float, b: float):
    """Coefficients of R_n = (p_n x + q_n) R_{n-1} - s_n R_{n-2}, n >= 2."""
    n = np.arange(2, nmax + 1, dtype=float)
    s = 2 * n + a + b
    den = 2 * n * (n + a + b) * (s - 2)
    ratio1 = n / (n + a)  # k_{n-1} / k_n with k_n = binom(n+a, n)
    ratio2 = ratio1 * (n - 1) / (n + a - 1)
    p = (s - 1) * s * (s - 2) / den * ratio1
    q = (s - 1) * (a * a - b * b) / den * ratio1
    r = 2 * (n + a - 1) * (n + b - 1) * s / den * ratio2
    return p, q, r


def _first(a: float, b: float, x):
    # P_1 / P_1(1)
    return ((a + 1) + (a + b + 2) * (x - 1) / 2) / (a + 1)


def iter_jacobi(nmax: int, a: float, b: float, x):
    """Yield R_0(x), ..., R_nmax(x) one degree at a time."""
    x = np.asarray(x, dtype=float)
    r_prev = np.ones_like(x)
    yield r_prev
    if nmax == 0:
        return
    r_cur = _first(a, b, x)
    yield r_cur
    if nmax == 1:
        return
    p, q, s = _recurrence(nmax, float(a), float(b))
    for k in range(nmax - 1):
        r_prev, r_cur = r_cur, (p[k] * x + q[k]) * r_cur - s[k] * r_prev
        yield r_cur


def jacobi_table(nmax: int, a: float, b: float, x) -> np.ndarray:
    """Array of shape (nmax+1, *x.shape) holding R_n^{(a,b)}(x)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    for n, row in enumerate(iter_jacobi(nmax, a, b, x)):
        out[n] = row
    return out


def eval_R(n: int, nu: float, mu: float, x):
    """Degree-n Jacobi polynomial for weight (1-x)^nu (1+x)^mu, divided by its value at 1."""
    if n < 0:
        raise ValidationError("degree must be nonnegative")
    row = None
    for row in iter_jacobi(n, nu, mu, x):
        pass
    return row if np.ndim(row) else float(row)


def jacobi_eval(coeffs, a: float, b: float, x):
    """Sum_n coeffs[n] R_n^{(a,b)}(x)."""
    coeffs = np.asarray(coeffs, dtype=float)
    x = np.asarray(x, dtype=float)
    acc = np.zeros(x.shape)
    for c, row in zip(coeffs, iter_jacobi(len(coeffs) - 1, a, b, x)):
        acc += c * row
    return acc


def eigenvalue(n, nu: float = NU, mu: float = MU):
    """D_{x,nu,mu} R_n = eigenvalue(n) R_n."""
    n = np.asarray(n, dtype=float)
    return -n * (n + nu + mu + 1)


@dataclass(frozen=True, eq=False)
class JacobiBasis:
    nu: float = NU
    mu: float = MU
    max_degree: int = 20
    norm_sq: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.nu < 0 or self.mu < 0:
            raise ValidationError("basis parameters must be nonnegative")
        x, w = _gauss_jacobi(self.max_degree + 2, float(self.nu), float(self.mu))
        h = np.array([w @ (row * row) for row in iter_jacobi(self.max_degree, self.nu, self.mu, x)])
        h.setflags(write=False)
        object.__setattr__(self, "norm_sq", h)

    def value_at_one(self, n: int) -> float:
        return 1.0

    def __call__(self, n: int, x):
        return eval_R(n, self.nu, self.mu, x)

    def table(self, x):
        return jacobi_table(self.max_degree, self.nu, self.mu, x)


@functools.lru_cache(maxsize=32)
def basis(nu: float = NU, mu: float = MU, max_degree: int = 20) -> JacobiBasis:
    return JacobiBasis(float(nu), float(mu), int(max_degree))


@dataclass(frozen=True, eq=False)
class JacobiSeries:
    basis: JacobiBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if len(c) - 1 > self.basis.max_degree:
            raise ValidationError("series longer than its basis")
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x):
        return jacobi_eval(self.coeffs, self.basis.nu, self.basis.mu, x)

    def synthesize(self) -> FuncRep:
        return FuncRep.jacobi(self.coeffs, self.basis.nu, self.basis.mu)

    @classmethod
    def analyze(cls, f, b: JacobiBasis, N: int | None = None) -> "JacobiSeries":
        N = b.max_degree if N is None else N
        a = project(as_funcrep(f), N, b.nu, b.mu)
        return cls(b, a / b.norm_sq[: N + 1])


def _moments(values, x, w, N, nu, mu):
    return np.array([w @ (values * row) for row in iter_jacobi(N, nu, mu, x)])


def project(f: FuncRep, N: int, nu: float = NU, mu: float = MU, order: int | None = None) -> np.ndarray:
    """Moments int f R_n (1-x)^nu (1+x)^mu dx for n = 0..N (exact for series)."""
    if f.is_series:
        order = order or max(N + 8, (N + f.degree) // 2 + 2)
    else:
        order = order or max(N + 8, 64)
    if nu == mu and f.breakpoints:
        x, w = weighted_rule(float(nu), order, f.breakpoints)
    else:
        x, w = _gauss_jacobi(order, float(nu), float(mu))
    v = f(x)
    if not np.all(np.isfinite(v)):
        raise NumericalError("non-finite values at quadrature nodes")
    return _moments(v, x, w, N, nu, mu)


def fourier_jacobi(f, N: int, order: int | None = None, check: bool = True) -> np.ndarray:
    """a_n(f) = int f(x) R_n(x) (1-x^2)^2 dx for n = 0..N."""
    if N < 0:
        raise ValidationError("N must be nonnegative")
    f = as_funcrep(f)
    a = project(f, N, NU, MU, order)
    if check and not f.is_series:
        m = order or max(N + 8, 64)
        a2 = project(f, N, NU, MU, 2 * m)
        gap = np.max(np.abs(a - a2))
        if gap > 1e-8:
            raise NumericalError(
                f"Fourier-Jacobi self-check failed (order-doubling discrepancy {gap:.2e}); "
                "f is not smooth enough for this order"
            )
        a = a2
    return a


def norm_sq(N: int, nu: float = NU, mu: float = MU) -> np.ndarray:
    return basis(nu, mu, max(N, 20)).norm_sq[: N + 1] if N <= 512 else _norm_sq_large(N, nu, mu)


@functools.lru_cache(maxsize=8)
def _norm_sq_large(N, nu, mu):
    x, w = _gauss_jacobi(N + 2, float(nu), float(mu))
    h = np.array([w @ (row * row) for row in iter_jacobi(N, nu, mu, x)])
    h.setflags(write=False)
    return h


def to_jacobi(f, degree: int | None = None, nu: float = NU, mu: float = MU) -> FuncRep:
    """Jacobi-series form; series convert exactly, callables are interpolated at ``degree`` first."""
    f = as_funcrep(f)
    if f.variant == "jacobi_series" and f.basis_params == (nu, mu):
        return f
    if not f.is_series:
        if degree is None:
            raise ValidationError("a callable must be interpolated first: pass degree")
        f = to_cheb(f, degree)
    N = f.degree
    x, w = _gauss_jacobi(N + 1, float(nu), float(mu))
    a = _moments(f(x), x, w, N, nu, mu)
    return FuncRep.jacobi(a / norm_sq(N, nu, mu), nu, mu, name=f.name)


def _D_cheb(c: np.ndarray, nu: float, mu: float) -> np.ndarray:
    n = len(c)
    d1 = C.chebder(c) if n > 1 else np.zeros(1)
    d2 = C.chebder(c, 2) if n > 2 else np.zeros(1)
    out = np.zeros(n + 2)
    out[: len(d2)] += d2
    x2d2 = C.chebmulx(C.chebmulx(d2))
    out[: len(x2d2)] -= x2d2
    out[: len(d1)] += (mu - nu) * d1
    xd1 = C.chebmulx(d1)
    out[: len(xd1)] -= (nu + mu + 2) * xd1
    return out[:n]


def apply_D(f, nu: float = NU, mu: float = MU, r: int = 1, degree: int | None = None) -> FuncRep:
    """D_{x,nu,mu}^r f = ((1-x^2) d2/dx2 + (mu - nu - (nu+mu+2) x) d/dx)^r f, exact on coefficients."""
    if r < 1:
        raise ValidationError(f"power r must be >= 1, got {r}")
    f = as_funcrep(f)
    if f.variant == "jacobi_series" and f.basis_params == (nu, mu):
        lam = eigenvalue(np.arange(len(f.coeffs)), nu, mu)
        return FuncRep.jacobi(f.coeffs * lam**r, nu, mu)
    if f.variant == "jacobi_series":
        f = to_cheb(f, f.degree)
    elif not f.is_series:
        if degree is None:
            raise ValidationError("a callable must be interpolated first: pass degree")
        f = to_cheb(f, degree)
    c = np.array(f.coeffs)
    for _ in range(r):
        c = _D_cheb(c, nu, mu)
    return FuncRep.cheb(c)
