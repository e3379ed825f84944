"""The asymmetric generalized translation and r-fold generalized differences.

For y = cos t the operator is

    tau_y(f, x) = 4 / (pi (1-x^2) (1+y)^2) * int_{-1}^{1} B_y(x, z, R) f(R) dz / sqrt(1-z^2),
    R = x y - sqrt(1-x^2) sqrt(1-y^2) z.

It is diagonal on the (2, 2) Jacobi polynomials, but the eigenvalue of R_n is the
(0, 4) Jacobi polynomial in y (normalized at 1), not R_n(y):

    tau_y(R_n, x) = R_n(x) Q_n(y),   Q_n = P_n^{(0,4)} / P_n^{(0,4)}(1).

Both families share the spectrum -n(n+5) of their Jacobi operators, which is why
tau commutes with D_{x,2,2} and with D_{y,0,4}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    FuncRep,
    Regime,
    ValidationError,
    WeightedSpace,
    as_funcrep,
    gauss_rule,
    weighted_norm,
)
from .jacobi import eval_R, jacobi_eval, jacobi_table, to_jacobi

# parameters of the y-side eigenvalue polynomials
Y_NU, Y_MU = 0.0, 4.0

FORMS = ("t_form", "y_form")

# extrapolation nodes used within cfg.edge of +-1
EDGE_POINTS = 5


@dataclass(frozen=True)
class TranslationConfig:
    quad_order: int = 64
    form: str = "t_form"
    r_max: int = 3
    edge: float = 1e-4
    # added to B; nonzero only for fault-injection runs
    kernel_perturbation: float = 0.0

    def __post_init__(self):
        if self.quad_order < 16:
            raise ValidationError(f"quad_order must be >= 16, got {self.quad_order}")
        if self.form not in FORMS:
            raise ValidationError(f"form must be one of {FORMS}, got {self.form!r}")


DEFAULT_CONFIG = TranslationConfig()


@dataclass(frozen=True)
class DifferenceRequest:
    r: int
    t: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(v) for v in np.atleast_1d(self.t))
        if isinstance(self.r, bool) or int(self.r) != self.r or self.r < 1:
            raise ValidationError(f"difference order r must be a positive integer, got {self.r!r}")
        if len(t) == 1 and self.r > 1:
            t = t * int(self.r)
        if len(t) != self.r:
            raise ValidationError(f"need {self.r} step parameters, got {len(t)}")
        if any(abs(v) >= math.pi for v in t):
            raise ValidationError("every |t_j| must be < pi")
        object.__setattr__(self, "r", int(self.r))
        object.__setattr__(self, "t", t)


def y_poly(n: int, y):
    """Q_n(y): the eigenvalue of R_n under tau_y."""
    return eval_R(n, Y_NU, Y_MU, y)


def y_multipliers(N: int, t) -> np.ndarray:
    """Q_n(cos t) for n = 0..N, shape (N+1, len(t))."""
    return jacobi_table(N, Y_NU, Y_MU, np.cos(np.atleast_1d(np.asarray(t, dtype=float))))


def kernel_B(y, x, z, sin_t=None, perturbation: float = 0.0):
    """Return (R, B) of the translation kernel.

    ``sin_t`` defaults to the principal branch +sqrt(1-y^2); the t-form passes
    the signed sin t, which keeps tau_t even in t.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    sy = np.sqrt(np.clip(1 - y * y, 0, None)) if sin_t is None else np.asarray(sin_t, dtype=float)
    sx = np.sqrt(np.clip(1 - x * x, 0, None))
    R = np.clip(x * y - sx * sy * z, -1.0, 1.0)
    B = 2 * (sx * y + x * z * sy + sx * (1 - y) * (1 - z * z)) ** 2 - (1 - R * R)
    if perturbation:
        B = B + perturbation
    return R, B


def _interior(f: FuncRep, y: np.ndarray, sin_t: np.ndarray, x: np.ndarray, cfg: TranslationConfig):
    # y, sin_t: shape (T,); x: shape (X,); result (T, X)
    ye, se, xe = y[:, None, None], sin_t[:, None, None], x[None, :, None]
    if cfg.form == "t_form":
        rule = gauss_rule("trapezoid_periodic", cfg.quad_order)
        R, B = kernel_B(ye, xe, np.cos(rule.nodes), se, cfg.kernel_perturbation)
        # the integrand depends on cos(phi) only: int_0^pi = half the full period
        integral = 0.5 * ((B * f(R)) @ rule.weights)
        half_cos = np.cos(np.arccos(np.clip(y, -1, 1)) / 2)
        return integral / (math.pi * (1 - x * x)[None, :] * half_cos[:, None] ** 4)
    rule = gauss_rule("gauss_chebyshev", cfg.quad_order)
    R, B = kernel_B(ye, xe, rule.nodes, None, cfg.kernel_perturbation)
    integral = (B * f(R)) @ rule.weights
    return 4.0 * integral / (math.pi * (1 - x * x)[None, :] * ((1 + y) ** 2)[:, None])


def translate(f, t_or_y, x, cfg: TranslationConfig = DEFAULT_CONFIG):
    """tau-hat_t(f, x) (t_form) or tau_y(f, x) (y_form) by quadrature.

    ``t_or_y`` may be an array; the result then has shape t.shape + x.shape.
    Points with |x| > 1 - cfg.edge are obtained by quartic extrapolation from
    x = +-(1 - j edge), j = 1..5; closer in, the 1/(1-x^2) factor amplifies round-off.
    """
    f = as_funcrep(f)
    p = np.asarray(t_or_y, dtype=float)
    if cfg.form == "t_form":
        if np.any(np.abs(p) >= math.pi):
            raise ValidationError("|t| must be < pi")
        y, sin_t = np.cos(p), np.sin(p)
    else:
        if np.any(p <= -1) or np.any(p > 1):
            raise ValidationError("y must lie in (-1, 1]")
        y, sin_t = p, np.sqrt(1 - p * p)
    x = np.asarray(x, dtype=float)
    y1, s1, xf = y.ravel(), sin_t.ravel(), x.ravel()
    h = cfg.edge
    inner = np.abs(xf) <= 1 - h
    if np.all(inner):
        out = _interior(f, y1, s1, xf, cfg)
    else:
        out = np.empty((y1.size, xf.size))
        out[:, inner] = _interior(f, y1, s1, xf[inner], cfg)
        xo = xf[~inner]
        d = 1 - np.abs(xo)
        j = np.arange(1, EDGE_POINTS + 1)
        for sg in (-1.0, 1.0):
            side = np.sign(xo) == sg
            if not side.any():
                continue
            v = _interior(f, y1, s1, sg * (1 - h * j), cfg)
            # Lagrange weights in the distance from the endpoint
            L = np.array([np.prod([(d[side] - h * b) / (h * a - h * b) for b in j if b != a], axis=0) for a in j])
            cols = np.flatnonzero(~inner)[side]
            out[:, cols] = v @ L
    out = out.reshape(p.shape + x.shape)
    return float(out) if out.ndim == 0 else out


def translated(f, t: float, cfg: TranslationConfig = DEFAULT_CONFIG) -> FuncRep:
    """tau-hat_t f as a callable FuncRep (t in the units of cfg.form)."""
    f = as_funcrep(f)
    return FuncRep.from_callable(lambda x: translate(f, t, x, cfg), breakpoints=(), name=f"tau({f.name})")


def _as_param(t: float, cfg: TranslationConfig) -> float:
    return t if cfg.form == "t_form" else math.cos(t)


def difference_r(
    f,
    req: DifferenceRequest,
    x,
    cfg: TranslationConfig = DEFAULT_CONFIG,
    method: str = "quadrature",
    degree: int | None = None,
):
    """r-fold generalized difference Delta^r_{t_1..t_r}(f, x); the t_j are angles.

    ``quadrature`` nests the translation integral (cost ~ quad_order**r per point);
    ``multiplier`` uses tau-hat_t R_n = Q_n(cos t) R_n on the (2,2) Jacobi series of f.
    """
    f = as_funcrep(f)
    if method == "multiplier":
        fj = to_jacobi(f, degree)
        N = fj.degree
        m = np.prod(y_multipliers(N, req.t) - 1.0, axis=1)
        return jacobi_eval(fj.coeffs * m, 2.0, 2.0, x)
    if method != "quadrature":
        raise ValidationError(f"unknown method {method!r}")
    if req.r > cfg.r_max:
        raise ValidationError(f"r={req.r} exceeds the cost guard r_max={cfg.r_max}")
    g = f
    for t in req.t:
        g = _delta(g, _as_param(t, cfg), cfg)
    v = g(x)
    return float(v) if np.ndim(v) == 0 else v


def _delta(g: FuncRep, param: float, cfg: TranslationConfig) -> FuncRep:
    return FuncRep.from_callable(lambda x: translate(g, param, x, cfg) - g(x))


def operator_norm_probe(
    t: float,
    space: WeightedSpace,
    trial_functions: Sequence,
    cfg: TranslationConfig = DEFAULT_CONFIG,
    resolution: int = 128,
) -> float:
    """max over trials of ||tau-hat_t f||_{p,alpha} / ||f||_{p,alpha}."""
    space.validate(Regime.TRANSLATION_BOUND)
    trials = [as_funcrep(f) for f in trial_functions]
    if not trials:
        raise ValidationError("empty trial set")
    best = 0.0
    for f in trials:
        den = weighted_norm(f, space, resolution)
        if den == 0:
            continue
        tf = FuncRep.from_callable(lambda x, f=f: translate(f, _as_param(t, cfg), x, cfg), f.breakpoints)
        best = max(best, weighted_norm(tf, space, resolution) / den)
    return best
