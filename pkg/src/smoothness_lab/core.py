"""Quadrature rules, weighted norms and function representations on [-1, 1]."""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import fft, optimize
from scipy.special import roots_jacobi, roots_legendre

INF = math.inf
DEFAULT_ORDER = 64


class ValidationError(ValueError):
    """Raised for malformed requests (bad orders, parameters out of range)."""


class RegimeError(ValidationError):
    """Raised when (p, alpha) lies outside the admissible range of a result."""


class NumericalError(RuntimeError):
    """Raised when a numerical procedure fails its own self-check."""


# ---------------------------------------------------------------------------
# quadrature

QUAD_KINDS = ("gauss_legendre", "gauss_jacobi", "gauss_chebyshev", "trapezoid_periodic")


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    params: tuple[float, ...] = ()

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def __call__(self, func: Callable) -> float:
        return self.integrate(func(self.nodes))


@functools.lru_cache(maxsize=128)
def _gauss_jacobi(order: int, a: float, b: float):
    if a == 0 and b == 0:
        x, w = roots_legendre(order)
    else:
        x, w = roots_jacobi(order, a, b)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_rule(kind: str, order: int, a: float = 0.0, b: float = 0.0) -> QuadratureRule:
    """Build a quadrature rule.

    ``gauss_jacobi`` integrates against ``(1-x)**a * (1+x)**b`` on [-1, 1];
    ``gauss_chebyshev`` against ``1/sqrt(1-x**2)``; ``trapezoid_periodic`` is the
    equal-weight rule on [0, 2*pi).
    """
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise ValidationError(f"quadrature order must be a positive integer, got {order!r}")
    order = int(order)
    if kind == "gauss_legendre":
        x, w = _gauss_jacobi(order, 0.0, 0.0)
        return QuadratureRule(kind, x, w, order)
    if kind == "gauss_jacobi":
        if a <= -1 or b <= -1:
            raise ValidationError(f"gauss_jacobi needs a, b > -1, got ({a}, {b})")
        x, w = _gauss_jacobi(order, float(a), float(b))
        return QuadratureRule(kind, x, w, order, (float(a), float(b)))
    if kind == "gauss_chebyshev":
        k = np.arange(order, 0, -1)
        x = np.cos((2 * k - 1) * np.pi / (2 * order))
        return QuadratureRule(kind, x, np.full(order, np.pi / order), order)
    if kind == "trapezoid_periodic":
        x = 2 * np.pi * np.arange(order) / order
        return QuadratureRule(kind, x, np.full(order, 2 * np.pi / order), order)
    raise ValidationError(f"unsupported quadrature kind {kind!r}; expected one of {QUAD_KINDS}")


def mapped_legendre(a, b, order: int):
    """Gauss-Legendre nodes/weights on [a, b]; ``a`` and ``b`` may be arrays (broadcast)."""
    s, w = _gauss_jacobi(order, 0.0, 0.0)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = (b - a) / 2
    return a + half * (s + 1), half * w


@functools.lru_cache(maxsize=64)
def weighted_rule(gamma: float, order: int = DEFAULT_ORDER, breakpoints: tuple = ()):
    """Nodes and weights for ``int g(x) (1-x^2)**gamma dx`` over [-1, 1].

    With breakpoints the interval is split and every piece gets its own rule,
    so integrands with kinks at the breakpoints still converge quickly. The
    end pieces carry the endpoint singularity in a Gauss-Jacobi weight.
    """
    if gamma <= -1:
        raise ValidationError(f"weight exponent must exceed -1, got {gamma}")
    cuts = sorted(b for b in breakpoints if -1 < b < 1)
    if not cuts:
        x, w = _gauss_jacobi(order, gamma, gamma)
        return x, w
    xs, ws = [], []
    lo = cuts[0]
    s, w = _gauss_jacobi(order, 0.0, gamma)
    x = -1 + (lo + 1) * (s + 1) / 2
    xs.append(x)
    ws.append(w * ((lo + 1) / 2) ** (gamma + 1) * (1 - x) ** gamma)
    for left, right in zip(cuts[:-1], cuts[1:]):
        x, w = mapped_legendre(left, right, order)
        xs.append(x)
        ws.append(w * (1 - x * x) ** gamma)
    hi = cuts[-1]
    s, w = _gauss_jacobi(order, gamma, 0.0)
    x = hi + (1 - hi) * (s + 1) / 2
    xs.append(x)
    ws.append(w * ((1 - hi) / 2) ** (gamma + 1) * (1 + x) ** gamma)
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def cheb_points(n: int) -> np.ndarray:
    """Chebyshev extrema cos(pi k/(n-1)), increasing; n >= 2."""
    return -np.cos(np.pi * np.arange(n) / (n - 1))


# ---------------------------------------------------------------------------
# weighted spaces


class Regime(str, enum.Enum):
    TRANSLATION_BOUND = "TranslationBound"
    H_BOUND = "HBound"
    H_DERIVATIVE_BOUND = "HDerivativeBound"
    DIRECT_INVERSE = "DirectInverse"
    BERNSTEIN_MARKOV = "BernsteinMarkov"
    ED = "ED"


def _regime_bounds(regime: Regime, p: float):
    """(lower, lower_inclusive, upper, upper_inclusive) for alpha; None means unbounded."""
    if regime in (Regime.TRANSLATION_BOUND, Regime.DIRECT_INVERSE):
        if p == 1:
            return 0.5, False, 1.0, True
        if p == INF:
            return 1.0, True, 1.5, False
        return 1 - 1 / (2 * p), False, 1.5 - 1 / (2 * p), False
    if regime is Regime.H_BOUND:
        if p == 1:
            return -1.0, False, 2.0, True
        if p == INF:
            return 0.0, True, 3.0, False
        return -1 / p, False, 3 - 1 / p, False
    if regime is Regime.H_DERIVATIVE_BOUND:
        if p == INF:
            return 0.0, True, 3.0, False
        return -1 / p, False, 3 - 1 / p, False
    if regime is Regime.BERNSTEIN_MARKOV:
        if p == INF:
            return 0.0, True, None, False
        return -1 / p, False, None, False
    if regime is Regime.ED:
        if p == 1:
            return -0.5, False, 2.0, True
        if p == INF:
            return 0.0, True, 2.5, False
        return -1 / (2 * p), False, 2.5 - 1 / (2 * p), False
    raise ValidationError(f"unknown regime {regime!r}")


def regime_description(regime: Regime | str, p: float) -> str:
    regime = Regime(regime)
    lo, lo_inc, hi, hi_inc = _regime_bounds(regime, p)
    left = f"{lo:g} {'<=' if lo_inc else '<'} alpha"
    right = "" if hi is None else f" {'<=' if hi_inc else '<'} {hi:g}"
    return f"{regime.value} at p={format_p(p)}: {left}{right}"


def format_p(p: float) -> str:
    return "inf" if p == INF else f"{p:g}"


def parse_p(text) -> float:
    if isinstance(text, str) and text.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    return float(text)


@dataclass(frozen=True)
class WeightedSpace:
    """The space L_{p,alpha}: f with f(x)(1-x^2)^alpha in L_p(-1, 1)."""

    p: float
    alpha: float
    regime: Regime | None = None

    def __post_init__(self):
        p = parse_p(self.p)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "alpha", float(self.alpha))
        if not (p >= 1):
            raise ValidationError(f"p must lie in [1, inf], got {self.p}")
        if not math.isfinite(self.alpha):
            raise ValidationError("alpha must be finite")
        if self.regime is not None:
            object.__setattr__(self, "regime", Regime(self.regime))
            self.validate(self.regime)

    @property
    def is_sup(self) -> bool:
        return self.p == INF

    def admits(self, regime: Regime | str) -> bool:
        lo, lo_inc, hi, hi_inc = _regime_bounds(Regime(regime), self.p)
        a = self.alpha
        ok_lo = a >= lo if lo_inc else a > lo
        ok_hi = True if hi is None else (a <= hi if hi_inc else a < hi)
        return ok_lo and ok_hi

    def validate(self, regime: Regime | str) -> "WeightedSpace":
        if not self.admits(regime):
            raise RegimeError(
                f"(p={format_p(self.p)}, alpha={self.alpha:g}) violates {regime_description(regime, self.p)}"
            )
        return self

    def __str__(self):
        return f"L_{{{format_p(self.p)},{self.alpha:g}}}"


# ---------------------------------------------------------------------------
# function representations

VARIANTS = ("callable", "cheb_series", "jacobi_series")


@dataclass(frozen=True, eq=False)
class FuncRep:
    """A function on [-1, 1]: a plain callable, a Chebyshev series or a Jacobi series.

    Jacobi series use the polynomials normalized by R_n(1) = 1 with the
    parameters in ``basis_params``. ``breakpoints`` lists interior points where
    a callable is not smooth; quadrature splits there.
    """

    variant: str
    coeffs: np.ndarray | None = None
    fn: Callable | None = field(default=None, repr=False)
    basis_params: tuple[float, float] | None = None
    breakpoints: tuple[float, ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"unknown FuncRep variant {self.variant!r}")
        if self.variant == "callable":
            if self.fn is None:
                raise ValidationError("callable FuncRep needs fn")
        else:
            c = np.array(self.coeffs, dtype=float).ravel()
            if c.size == 0:
                c = np.zeros(1)
            c.setflags(write=False)
            object.__setattr__(self, "coeffs", c)
        if self.variant == "jacobi_series" and self.basis_params is None:
            object.__setattr__(self, "basis_params", (2.0, 2.0))
        object.__setattr__(self, "breakpoints", tuple(sorted(float(b) for b in self.breakpoints)))

    @classmethod
    def from_callable(cls, fn, breakpoints: Sequence[float] = (), name: str = "") -> "FuncRep":
        return cls("callable", fn=fn, breakpoints=tuple(breakpoints), name=name)

    @classmethod
    def cheb(cls, coeffs, name: str = "") -> "FuncRep":
        return cls("cheb_series", coeffs=coeffs, name=name)

    @classmethod
    def jacobi(cls, coeffs, nu: float = 2.0, mu: float = 2.0, name: str = "") -> "FuncRep":
        return cls("jacobi_series", coeffs=coeffs, basis_params=(float(nu), float(mu)), name=name)

    @classmethod
    def monomial(cls, coeffs, name: str = "") -> "FuncRep":
        """Polynomial sum c_k x^k, stored as a Chebyshev series."""
        return cls.cheb(C.poly2cheb(np.asarray(coeffs, dtype=float)), name=name)

    @classmethod
    def constant(cls, value: float = 1.0) -> "FuncRep":
        return cls.cheb([value], name=f"const:{value:g}")

    @property
    def is_series(self) -> bool:
        return self.variant != "callable"

    @property
    def degree(self) -> int | None:
        if not self.is_series:
            return None
        return len(self.coeffs) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.variant == "callable":
            return np.asarray(self.fn(x), dtype=float) * np.ones_like(x)
        if self.variant == "cheb_series":
            return C.chebval(x, self.coeffs)
        from .jacobi import jacobi_eval

        return jacobi_eval(self.coeffs, self.basis_params[0], self.basis_params[1], x)

    def _combine(self, other: "FuncRep", sign: float) -> "FuncRep":
        if (
            self.is_series
            and other.is_series
            and self.variant == other.variant
            and self.basis_params == other.basis_params
        ):
            n = max(len(self.coeffs), len(other.coeffs))
            c = np.zeros(n)
            c[: len(self.coeffs)] += self.coeffs
            c[: len(other.coeffs)] += sign * other.coeffs
            return FuncRep(self.variant, coeffs=c, basis_params=self.basis_params)
        a, b = self, other
        return FuncRep.from_callable(
            lambda x: a(x) + sign * b(x), breakpoints=self.breakpoints + other.breakpoints
        )

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def scaled(self, c: float) -> "FuncRep":
        if self.is_series:
            return FuncRep(self.variant, coeffs=c * self.coeffs, basis_params=self.basis_params, name=self.name)
        f = self
        return FuncRep.from_callable(lambda x: c * f(x), self.breakpoints, self.name)

    def __mul__(self, c):
        return self.scaled(float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self.scaled(-1.0)


def as_funcrep(f) -> FuncRep:
    if isinstance(f, FuncRep):
        return f
    if callable(f):
        return FuncRep.from_callable(f)
    raise ValidationError(f"cannot interpret {type(f).__name__} as a function")


def to_cheb(f, degree: int) -> FuncRep:
    """Chebyshev interpolant of ``f`` at the degree+1 Chebyshev extrema."""
    if degree < 0:
        raise ValidationError(f"degree must be nonnegative, got {degree}")
    f = as_funcrep(f)
    if degree == 0:
        return FuncRep.cheb([float(f(np.array([0.0]))[0])], name=f.name)
    x = np.cos(np.pi * np.arange(degree + 1) / degree)
    v = f(x)
    if not np.all(np.isfinite(v)):
        raise NumericalError("non-finite function values at interpolation nodes")
    c = fft.dct(v, type=1) / degree
    c[0] /= 2
    c[-1] /= 2
    return FuncRep.cheb(c, name=f.name)


def cheb_interior(fn: Callable, degree: int) -> FuncRep:
    """Interpolant at first-kind Chebyshev points (never touches x = +-1)."""
    return FuncRep.cheb(C.chebinterpolate(lambda x: np.asarray(fn(x), dtype=float), degree))


def as_cheb(f: FuncRep, degree: int | None = None) -> FuncRep:
    """Exact Chebyshev form of a series; callables are interpolated at ``degree``."""
    if f.variant == "cheb_series":
        return f
    if f.variant == "jacobi_series":
        return to_cheb(f, f.degree)
    if degree is None:
        raise ValidationError("a callable must be interpolated first: pass degree")
    return to_cheb(f, degree)


# ---------------------------------------------------------------------------
# norms


def norm_order(f: FuncRep, resolution: int) -> int:
    if f.is_series:
        return max(resolution, f.degree + 1)
    return resolution


def sup_grid(resolution: int, alpha: float, extra: Sequence[float] = ()) -> np.ndarray:
    """Chebyshev-extrema grid for weighted sup norms (endpoints dropped when alpha < 0)."""
    x = np.union1d(cheb_points(max(resolution, 2)), np.asarray([0.0, *extra], dtype=float))
    if alpha < 0:
        x = x[np.abs(x) < 1]
    return x


def sup_weights(x: np.ndarray, alpha: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(np.abs(x) < 1, (1 - x * x) ** alpha, 1.0 if alpha == 0 else 0.0)


def lp_from_samples(values: np.ndarray, weights: np.ndarray, p: float, axis: int = 0) -> np.ndarray:
    """Discrete weighted norm; for p = inf ``weights`` are the pointwise factors."""
    a = np.abs(values)
    if p == INF:
        w = np.expand_dims(weights, tuple(range(1, a.ndim))) if axis == 0 else weights
        return np.max(a * w, axis=axis)
    w = np.expand_dims(weights, tuple(range(1, a.ndim))) if axis == 0 else weights
    if p == 1:
        return np.sum(w * a, axis=axis)
    if p == 2:
        return np.sqrt(np.sum(w * a * a, axis=axis))
    return np.sum(w * a**p, axis=axis) ** (1 / p)


def norm_nodes(space: WeightedSpace, resolution: int, breakpoints: Sequence[float] = ()):
    """(nodes, weights) such that lp_from_samples(f(nodes), weights, p) ~ ||f||_{p,alpha}."""
    if space.is_sup:
        x = sup_grid(resolution, space.alpha, breakpoints)
        return x, sup_weights(x, space.alpha)
    x, w = weighted_rule(space.p * space.alpha, int(resolution), tuple(breakpoints))
    return x, w


def weighted_norm(f, space: WeightedSpace, resolution: int = DEFAULT_ORDER) -> float:
    """||f||_{p,alpha} = ||f(x)(1-x^2)^alpha||_p by quadrature (p < inf) or Chebyshev grid max."""
    if resolution < 32:
        raise ValidationError(f"resolution must be >= 32, got {resolution}")
    f = as_funcrep(f)
    n = norm_order(f, resolution)
    if space.is_sup and f.is_series:
        n = max(n, 4 * f.degree + 1)
    x, w = norm_nodes(space, n, f.breakpoints)
    v = f(x)
    if not np.all(np.isfinite(v)):
        raise NumericalError("non-finite function values at quadrature nodes")
    if space.is_sup:
        return _refined_sup(f, x, np.abs(v) * w, space.alpha)
    return float(lp_from_samples(v, w, space.p))


def _refined_sup(f: FuncRep, x: np.ndarray, g: np.ndarray, alpha: float) -> float:
    """Grid maximum of g = |f| w, polished by a bounded scalar search between the neighbours."""
    k = int(np.argmax(g))
    best = float(g[k])
    lo, hi = x[max(k - 1, 0)], x[min(k + 1, len(x) - 1)]
    if hi <= lo:
        return best
    res = optimize.minimize_scalar(
        lambda t: -float(np.abs(f(np.array([t]))[0]) * sup_weights(np.array([t]), alpha)[0]),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return max(best, -float(res.fun)) if np.isfinite(res.fun) else best


def quadrature_error_estimate(integrand: Callable, gamma: float, order: int, breakpoints=()) -> float:
    """|Q_m - Q_2m| for int integrand(x) (1-x^2)^gamma dx."""
    x1, w1 = weighted_rule(gamma, order, tuple(breakpoints))
    x2, w2 = weighted_rule(gamma, 2 * order, tuple(breakpoints))
    return float(np.max(np.abs(w1 @ integrand(x1) - w2 @ integrand(x2))))
