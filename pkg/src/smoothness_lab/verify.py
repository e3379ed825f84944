"""Ratio tables for the direct/inverse and equivalence theorems, and the identity suite."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .approx import alternation, best_approx, parseval_en
from .core import FuncRep, Regime, ValidationError, WeightedSpace, as_funcrep, cheb_interior, weighted_norm
from .jacobi import apply_D, eval_R, fourier_jacobi, to_jacobi
from .smoothness import (
    SLWeight,
    H_apply,
    H_delta_apply,
    kappa,
    k_functional,
    lemma5_rhs,
    modulus,
)
from .translation import (
    Y_MU,
    Y_NU,
    DifferenceRequest,
    TranslationConfig,
    difference_r,
    translate,
    y_poly,
)

SEED = 20240101
SPACE_21 = WeightedSpace(2, 1)


# ---------------------------------------------------------------------------
# trial functions


def _abs32(x):
    return np.abs(x) ** 1.5


def _quarter(x):
    return np.clip(1 - x * x, 0, None) ** 0.25


def random_poly(degree: int = 10, seed: int = SEED) -> FuncRep:
    rng = np.random.default_rng(seed)
    return FuncRep.jacobi(rng.standard_normal(degree + 1), name=f"randpoly{degree}")


@dataclass(frozen=True)
class TrialFamily:
    members: dict

    @classmethod
    def standard(cls, seed: int = SEED) -> "TrialFamily":
        m = {f"R{k}": FuncRep.jacobi(np.eye(k + 1)[k], name=f"R{k}") for k in range(13)}
        m["abs32"] = FuncRep.from_callable(_abs32, breakpoints=(0.0,), name="abs32")
        m["exp"] = FuncRep.from_callable(np.exp, name="exp")
        m["quarter"] = FuncRep.from_callable(_quarter, name="quarter")
        m["randpoly"] = random_poly(10, seed)
        return cls(m)

    def __getitem__(self, name: str) -> FuncRep:
        try:
            return self.members[name]
        except KeyError:
            raise ValidationError(f"unknown trial function {name!r}; known: {', '.join(self.members)}") from None

    def __iter__(self):
        return iter(self.members.items())

    def names(self):
        return list(self.members)


# ---------------------------------------------------------------------------
# ratio tables


@dataclass(frozen=True)
class Row:
    params: dict
    lhs: float
    rhs: float
    ratio: float
    degenerate: bool = False


@dataclass
class RatioTable:
    label: str
    rows: list = field(default_factory=list)

    def add(self, params: dict, lhs: float, rhs: float):
        lhs, rhs = float(lhs), float(rhs)
        degenerate = lhs == 0 and rhs == 0
        ratio = math.nan if degenerate else (lhs / rhs if rhs != 0 else math.inf)
        self.rows.append(Row(dict(params), lhs, rhs, ratio, degenerate))

    def sides(self):
        return sorted({r.params.get("side", "") for r in self.rows})

    def summary(self, side: str | None = None):
        """(min_ratio, max_ratio, spread) over nondegenerate rows."""
        vals = [r.ratio for r in self.rows if not r.degenerate and (side is None or r.params.get("side", "") == side)]
        if not vals:
            return (math.nan, math.nan, math.nan)
        lo, hi = min(vals), max(vals)
        if lo <= 0 or not math.isfinite(hi):
            return (lo, hi, math.inf)
        return (lo, hi, hi / lo)

    def summaries(self) -> dict:
        return {s: self.summary(s) for s in self.sides()}

    def bounded(self, max_spread: float) -> bool:
        return all(0 < s[0] and s[2] <= max_spread for s in self.summaries().values())

    def to_csv(self) -> str:
        keys = []
        for r in self.rows:
            keys += [k for k in r.params if k not in keys]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys + ["lhs", "rhs", "ratio"])
        for r in self.rows:
            w.writerow([_fmt(r.params.get(k, "")) for k in keys] + [_fmt(r.lhs), _fmt(r.rhs), _fmt(r.ratio)])
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def verify_equivalence(f, r: int, space: WeightedSpace, deltas: Sequence[float], search_degree: int = 64) -> RatioTable:
    """omega_r(f, d) against K(f, d) with the theorem's cos^4(d/2) normalizations.

    side ``lower``: omega / (cos^4(d/2)^(r(r-1)) K); side ``upper``: omega cos^4(d/2)^r / K.
    """
    space.validate(Regime.DIRECT_INVERSE)
    f = as_funcrep(f)
    table = RatioTable(f"equivalence {f.name} r={r} {space}")
    for d in deltas:
        d = float(d)
        if not 0 < d < math.pi:
            raise ValidationError("deltas must lie in (0, pi)")
        om = modulus(f, r, d, space).value
        K = k_functional(f, r, d, space, search_degree).value
        c4 = math.cos(d / 2) ** 4
        table.add({"side": "lower", "delta": d}, om, c4 ** (r * (r - 1)) * K)
        table.add({"side": "upper", "delta": d}, om * c4**r, K)
    return table


def en_sequence(f, n_max: int, space: WeightedSpace) -> np.ndarray:
    """E_1 .. E_{n_max}."""
    f = as_funcrep(f)
    return np.array([best_approx(f, n, space).value for n in range(1, n_max + 1)])


def verify_jackson(f, r: int, space: WeightedSpace, n_max: int = 64, n_min: int = 2) -> RatioTable:
    """Side ``left``: E_n / omega_r(f, 1/n); side ``right``: omega_r(f, 1/n) / (n^-2r sum nu^(2r-1) E_nu)."""
    space.validate(Regime.DIRECT_INVERSE)
    if not 1 <= n_min <= n_max <= 64:
        raise ValidationError("need 1 <= n_min <= n_max <= 64")
    f = as_funcrep(f)
    E = en_sequence(f, n_max, space)
    nu = np.arange(1, n_max + 1, dtype=float)
    partial = np.cumsum(nu ** (2 * r - 1) * E)
    table = RatioTable(f"jackson {f.name} r={r} {space}")
    for n in range(n_min, n_max + 1):
        om = modulus(f, r, 1.0 / n, space).value
        table.add({"side": "left", "n": n}, E[n - 1], om)
        table.add({"side": "right", "n": n}, om, n ** (-2.0 * r) * partial[n - 1])
    return table


# ---------------------------------------------------------------------------
# identity suite


@dataclass(frozen=True)
class Check:
    lemma_id: str
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_error <= self.tolerance)

    def as_dict(self):
        return {
            "lemma_id": self.lemma_id,
            "max_error": float(f"{self.max_error:.12g}"),
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


X_GRID = np.linspace(-0.95, 0.95, 17)
Y_GRID = np.linspace(-0.9, 1.0, 9)


def _rel(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / max(1.0, float(np.max(np.abs(b)))))


def translation_checks(f: FuncRep, cfg: TranslationConfig) -> list:
    ycfg = TranslationConfig(cfg.quad_order, "y_form", cfg.r_max, cfg.edge, cfg.kernel_perturbation)
    out = []
    N = f.degree
    a = fourier_jacobi(f, N)
    err = 0.0
    for y in Y_GRID:
        ty = FuncRep.from_callable(lambda x, y=y: translate(f, y, x, ycfg))
        at = fourier_jacobi(ty, N, order=N + 16, check=False)
        q = np.array([y_poly(n, y) for n in range(N + 1)])
        err = max(err, float(np.max(np.abs(at - a * q))))
    out.append(Check("translation.multiplier", err, 1e-7))
    err = 0.0
    for n in range(13):
        Rn = FuncRep.jacobi(np.eye(n + 1)[n])
        for y in Y_GRID:
            err = max(err, float(np.max(np.abs(translate(Rn, y, X_GRID, ycfg) - eval_R(n, 2, 2, X_GRID) * y_poly(n, y)))))
    out.append(Check("translation.eigenfunctions", err, 1e-7))
    one = FuncRep.constant(1.0)
    out.append(Check("translation.constant", max(float(np.max(np.abs(translate(one, y, X_GRID, ycfg) - 1))) for y in Y_GRID), 1e-9))
    out.append(Check("translation.identity_at_zero", float(np.max(np.abs(translate(f, 0.0, X_GRID, cfg) - f(X_GRID)))), 1e-9))
    ts = (0.4, 1.3, 2.6)
    out.append(Check("translation.even_in_t", max(float(np.max(np.abs(translate(f, t, X_GRID, cfg) - translate(f, -t, X_GRID, cfg)))) for t in ts), 1e-7))
    out.append(Check("translation.forms_agree", max(float(np.max(np.abs(translate(f, t, X_GRID, cfg) - translate(f, math.cos(t), X_GRID, ycfg)))) for t in ts), 1e-9))
    g = random_poly(8, SEED + 1)
    err = 0.0
    from .core import _gauss_jacobi

    xq, wq = _gauss_jacobi(24, 2.0, 2.0)
    for y in Y_GRID:
        lhs = wq @ (f(xq) * translate(g, y, xq, ycfg))
        rhs = wq @ (g(xq) * translate(f, y, xq, ycfg))
        err = max(err, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    out.append(Check("translation.self_adjoint", err, 1e-7))
    a_, b_ = 0.7, -1.9
    err = max(
        float(np.max(np.abs(translate(f * a_ + g * b_, y, X_GRID, ycfg) - a_ * translate(f, y, X_GRID, ycfg) - b_ * translate(g, y, X_GRID, ycfg))))
        for y in Y_GRID
    )
    out.append(Check("translation.linear", err, 1e-9))
    Df = apply_D(f)
    errx = erry = 0.0
    for y in Y_GRID:
        lhs = translate(Df, y, X_GRID, ycfg)
        Tx = cheb_interior(lambda x, y=y: translate(f, y, x, ycfg), N)
        errx = max(errx, _rel(apply_D(Tx)(X_GRID), lhs))
    for x0 in X_GRID[::4]:
        Ty = cheb_interior(lambda y, x0=x0: translate(f, y, np.array([x0]), ycfg)[..., 0], N)
        DyT = apply_D(Ty, Y_NU, Y_MU)
        yy = Y_GRID[:-1]
        lhs = np.array([translate(Df, y, np.array([x0]), ycfg)[0] for y in yy])
        erry = max(erry, _rel(DyT(yy), lhs))
    out.append(Check("translation.commutes_Dx", errx, 1e-6))
    out.append(Check("translation.commutes_Dy", erry, 1e-6))
    return out


def smoothness_checks(f: FuncRep, cfg: TranslationConfig, r_values=(1, 2), weight: SLWeight = SLWeight()) -> list:
    out = []
    mean = float(to_jacobi(f).coeffs[0])
    f8 = random_poly(8, SEED + 2)
    err = 0.0
    for t in (0.4, 1.0):
        lhs = translate(f8, t, X_GRID, cfg) - f8(X_GRID)
        err = max(err, float(np.max(np.abs(lhs - lemma5_rhs(f8, t, X_GRID, weight, cfg)))))
    out.append(Check("smoothness.lemma5", err, 1e-6))
    for r in r_values:
        Hr = H_apply(f, r, "integral")
        resid = apply_D(Hr, r=r) - (f - FuncRep.constant(mean))
        out.append(Check(f"smoothness.DrHr.r{r}", weighted_norm(resid, SPACE_21, 64), 1e-7))
        if r > 1:
            err = 0.0
            for l in range(1, r):
                Hrl = H_apply(f, r - l, "integral")
                c = float(to_jacobi(Hrl).coeffs[0])
                resid = apply_D(Hr, r=l) - Hrl + FuncRep.constant(c)
                err = max(err, weighted_norm(resid, SPACE_21, 64))
            out.append(Check(f"smoothness.DlHr.r{r}", err, 1e-7))
        e12 = ecor = epath = 0.0
        for d in (0.3, 0.8):
            kr = kappa(d, weight) ** r
            Hd = H_delta_apply(f, d, r, "integral", weight, cfg=cfg)
            req = DifferenceRequest(r, (d,) * r)
            rhs = difference_r(Hr, req, X_GRID, cfg) / kr + mean
            e12 = max(e12, float(np.max(np.abs(Hd(X_GRID) - rhs))))
            lhs = apply_D(Hd, r=r)(X_GRID)
            ecor = max(ecor, float(np.max(np.abs(lhs - difference_r(f, req, X_GRID, cfg) / kr))))
            probe = np.linspace(-0.9, 0.9, 16)
            Hm = H_delta_apply(f, d, r, "multiplier", weight)
            epath = max(epath, float(np.max(np.abs(Hd(probe) - Hm(probe)))))
        out.append(Check(f"smoothness.lemma12.r{r}", e12, 1e-6))
        out.append(Check(f"smoothness.corollary12.r{r}", ecor, 1e-6))
        out.append(Check(f"smoothness.Hdelta_paths.r{r}", epath, 1e-5))
    lim = kappa(0.01, weight) / 1e-4
    out.append(Check("smoothness.kappa_limit", abs(lim - weight.kappa_limit) / weight.kappa_limit, 5e-3))
    return out


def approx_checks(f: FuncRep) -> list:
    out = []
    x2 = FuncRep.monomial([0, 0, 1])
    out.append(Check("approx.E1_x2_p2", abs(best_approx(x2, 1, WeightedSpace(2, 0)).value - math.sqrt(8 / 45)), 1e-9))
    sup = WeightedSpace("inf", 0)
    res = best_approx(x2, 2, sup)
    ok, _, _ = alternation(res, x2, sup)
    out.append(Check("approx.E2_x2_inf", abs(res.value - 0.5) if ok else math.inf, 1e-6))
    err = 0.0
    for n in (2, 5, 9):
        err = max(err, abs(best_approx(f, n, SPACE_21).value - parseval_en(f, n)))
    out.append(Check("approx.parseval", err, 1e-9))
    P = FuncRep.monomial([0.3, -1.2, 0.5])
    err = max(
        abs(best_approx(f + P, n, sp).value - best_approx(f, n, sp).value)
        for n in (3, 6)
        for sp in (SPACE_21, WeightedSpace("inf", 1))
    )
    out.append(Check("approx.shift_invariance", err, 1e-9))
    return out


def run_lemma_suite(seed: int = SEED, cfg: TranslationConfig | None = None, r_values: Iterable[int] = (1, 2)) -> dict:
    """Every identity check with its max observed error; deterministic in ``seed``."""
    r_values = tuple(r_values)
    for r in r_values:
        if isinstance(r, bool) or int(r) != r or r < 1:
            raise ValidationError(f"r must be a positive integer, got {r!r}")
    cfg = cfg or TranslationConfig()
    f = random_poly(10, seed)
    f12 = random_poly(12, seed)
    checks = translation_checks(f, cfg) + smoothness_checks(f12, cfg, r_values) + approx_checks(f)
    return {
        "seed": int(seed),
        "all_pass": all(c.passed for c in checks),
        "results": [c.as_dict() for c in checks],
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
