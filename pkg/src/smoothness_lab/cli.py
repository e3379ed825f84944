"""Command-line front end: ``smoothness-lab <command> [flags]``."""
from __future__ import annotations

import argparse
import contextlib
import dataclasses
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .core import (
    FuncRep,
    NumericalError,
    Regime,
    ValidationError,
    WeightedSpace,
    format_p,
    parse_p,
    regime_description,
)

COMMANDS = (
    "modulus",
    "kfunc",
    "bestapprox",
    "translate",
    "verify-equivalence",
    "verify-jackson",
    "lemma-suite",
)

# regime each command checks (p, alpha) against
COMMAND_REGIME = {
    "modulus": Regime.DIRECT_INVERSE,
    "kfunc": Regime.DIRECT_INVERSE,
    "verify-equivalence": Regime.DIRECT_INVERSE,
    "verify-jackson": Regime.DIRECT_INVERSE,
    "bestapprox": Regime.BERNSTEIN_MARKOV,
}

DEFAULT_DELTAS = tuple(round(0.1 * k, 10) for k in range(1, 16))


def parse_function(spec: str) -> FuncRep:
    """``poly:c0,c1,..`` (monomial), ``jacobi:b0,b1,..``, ``const:v`` or a trial-family name."""
    from .verify import TrialFamily

    spec = spec.strip()
    kind, _, body = spec.partition(":")
    try:
        if kind == "poly" and body:
            return FuncRep.monomial([float(v) for v in body.split(",")], name=spec)
        if kind == "jacobi" and body:
            return FuncRep.jacobi([float(v) for v in body.split(",")], name=spec)
        if kind == "const" and body:
            return FuncRep.cheb([float(body)], name=spec)
    except ValueError:
        raise ValidationError(f"bad numbers in function spec {spec!r}") from None
    return TrialFamily.standard()[spec]


def _floats(text) -> tuple:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None


@dataclass(frozen=True)
class RunConfig:
    command: str
    function: str = "randpoly"
    r: int = 1
    delta: float = 0.5
    deltas: tuple = DEFAULT_DELTAS
    n: int = 1
    n_min: int = 2
    n_max: int = 64
    p: float = 2.0
    alpha: float = 1.0
    quad_order: int = 64
    t_grid: int = 12
    x_resolution: int = 64
    search_degree: int = 64
    t: float = 0.5
    x: tuple = (0.0,)
    form: str = "t_form"
    out: str = ""
    seed: int = 20240101

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        for name in ("r", "n", "n_min", "n_max", "quad_order", "t_grid", "x_resolution", "search_degree", "seed"):
            v = getattr(self, name)
            if isinstance(v, float) and not v.is_integer():
                raise ValidationError(f"{name} must be an integer, got {v}")
            object.__setattr__(self, name, int(v))
        for name in ("delta", "alpha", "t"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "p", parse_p(self.p))
        object.__setattr__(self, "deltas", _floats(self.deltas))
        object.__setattr__(self, "x", _floats(self.x))
        regime = COMMAND_REGIME.get(self.command)
        if regime is not None:
            WeightedSpace(self.p, self.alpha).validate(regime)

    @property
    def space(self) -> WeightedSpace:
        return WeightedSpace(self.p, self.alpha)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "p":
                v = format_p(v)
            elif isinstance(v, tuple):
                v = ",".join(repr(float(a)) for a in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(**read_config(text))


FIELD_NAMES = {f.name for f in dataclasses.fields(RunConfig)}


def read_config(text: str) -> dict:
    """key=value lines; '#' starts a comment; dashes in keys read as underscores."""
    out = {}
    for k, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {k}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in FIELD_NAMES:
            raise ValidationError(f"config line {k}: unknown key {key!r}")
        out[key] = value
    return out


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _regime_help(regime: Regime) -> str:
    return "; ".join(regime_description(regime, p) for p in (1.0, 2.0, math.inf))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="smoothness-lab", description="Generalized moduli of smoothness on [-1, 1].")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    def common(sp, space: Regime | None):
        sp.add_argument("--config", help="key=value file; explicit flags override it")
        sp.add_argument("--out", help="output file (CSV for tables, JSON for the lemma suite)")
        if space is not None:
            sp.add_argument("--p", help="exponent in [1, inf]; 'inf' for the sup norm")
            sp.add_argument("--alpha", type=float, help=f"weight exponent; {_regime_help(space)}")

    def fn(sp):
        sp.add_argument("--f", dest="function",
                        help="poly:c0,c1,.. | jacobi:b0,b1,.. | const:v | R0..R12, abs32, exp, quarter, randpoly")

    sp = sub.add_parser("modulus", help="omega_r(f, delta)")
    fn(sp)
    sp.add_argument("--r", type=int, help="difference order, 1..3")
    sp.add_argument("--delta", type=float, help="0 <= delta < pi")
    sp.add_argument("--t-grid", dest="t_grid", type=int, help="t-grid points per axis (refined once)")
    common(sp, Regime.DIRECT_INVERSE)

    sp = sub.add_parser("kfunc", help="K-functional K(f, delta)")
    fn(sp)
    sp.add_argument("--r", type=int, help="order of D^r, >= 1")
    sp.add_argument("--delta", type=float, help="0 <= delta < pi")
    sp.add_argument("--search-degree", dest="search_degree", type=int, help="max degree of g, >= 4")
    common(sp, Regime.DIRECT_INVERSE)

    sp = sub.add_parser("bestapprox", help="E_n(f): degree <= n-1")
    fn(sp)
    sp.add_argument("--n", type=int, help="n >= 1")
    common(sp, Regime.BERNSTEIN_MARKOV)

    sp = sub.add_parser("translate", help="generalized translation at points x")
    fn(sp)
    sp.add_argument("--t", type=float, help="shift: angle t (t_form, |t| < pi) or y = cos t (y_form)")
    sp.add_argument("--x", help="comma-separated points in [-1, 1]")
    sp.add_argument("--form", choices=("t_form", "y_form"), help="operator form")
    sp.add_argument("--quad-order", dest="quad_order", type=int, help="quadrature nodes, >= 16")
    common(sp, None)

    sp = sub.add_parser("verify-equivalence", help="omega against K over a delta sweep (CSV)")
    fn(sp)
    sp.add_argument("--r", type=int, help="order, 1..3")
    sp.add_argument("--deltas", help="comma-separated deltas in (0, pi); default 0.1..1.5")
    sp.add_argument("--search-degree", dest="search_degree", type=int, help="max degree for K, >= 4")
    common(sp, Regime.DIRECT_INVERSE)

    sp = sub.add_parser("verify-jackson", help="E_n against omega_r(f, 1/n) (CSV)")
    fn(sp)
    sp.add_argument("--r", type=int, help="order, 1..3")
    sp.add_argument("--n-min", dest="n_min", type=int, help="first n, >= 1")
    sp.add_argument("--n-max", dest="n_max", type=int, help="last n, <= 64")
    common(sp, Regime.DIRECT_INVERSE)

    sp = sub.add_parser("lemma-suite", help="identity checks (JSON)")
    sp.add_argument("--seed", type=int, help="seed for the random test polynomials")
    common(sp, None)
    return parser


def config_from_args(argv) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        parser.print_help(sys.stderr)
        raise ValidationError("missing command")
    values = {}
    if getattr(ns, "config", None):
        with open(ns.config) as fh:
            values.update(read_config(fh.read()))
    for k, v in vars(ns).items():
        if k in FIELD_NAMES and v is not None:
            values[k] = v
    values["command"] = ns.command
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# execution


@contextlib.contextmanager
def thread_limit():
    """Cap BLAS threads by SMOOTHNESS_LAB_THREADS when threadpoolctl is present."""
    raw = os.environ.get("SMOOTHNESS_LAB_THREADS", "").strip()
    if not raw:
        yield None
        return
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"SMOOTHNESS_LAB_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError("SMOOTHNESS_LAB_THREADS must be >= 1")
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        yield n
        return
    with threadpool_limits(limits=n):
        yield n


def _emit(text: str, out: str):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(cfg: RunConfig) -> int:
    from . import approx, smoothness, translation, verify

    g = lambda v: format(float(v), ".17g")  # noqa: E731
    c = cfg.command
    if c == "lemma-suite":
        report = verify.run_lemma_suite(cfg.seed)
        _emit(verify.report_json(report), cfg.out)
        if cfg.out:
            print(f"{sum(r['pass'] for r in report['results'])}/{len(report['results'])} checks passed")
        return 0 if report["all_pass"] else 2
    f = parse_function(cfg.function)
    if c == "modulus":
        res = smoothness.modulus(f, cfg.r, cfg.delta, cfg.space, t_grid_size=cfg.t_grid)
        _emit(f"value={g(res.value)}\nargmax_t={','.join(g(t) for t in res.argmax_t)}\n", cfg.out)
    elif c == "kfunc":
        res = smoothness.k_functional(f, cfg.r, cfg.delta, cfg.space, cfg.search_degree)
        _emit(f"value={g(res.value)}\nfit={g(res.split[0])}\npenalty={g(res.split[1])}\n", cfg.out)
    elif c == "bestapprox":
        res = approx.best_approx(f, cfg.n, cfg.space)
        _emit(f"value={g(res.value)}\ncertified_gap={g(res.certified_gap)}\n", cfg.out)
    elif c == "translate":
        tcfg = translation.TranslationConfig(quad_order=cfg.quad_order, form=cfg.form)
        vals = translation.translate(f, cfg.t, np.array(cfg.x), tcfg)
        _emit("".join(f"{g(x)},{g(v)}\n" for x, v in zip(cfg.x, np.atleast_1d(vals))), cfg.out)
    elif c == "verify-equivalence":
        table = verify.verify_equivalence(f, cfg.r, cfg.space, cfg.deltas, cfg.search_degree)
        _emit(table.to_csv(), cfg.out)
        _print_summary(table, bool(cfg.out))
    elif c == "verify-jackson":
        table = verify.verify_jackson(f, cfg.r, cfg.space, cfg.n_max, cfg.n_min)
        _emit(table.to_csv(), cfg.out)
        _print_summary(table, bool(cfg.out))
    return 0


def _print_summary(table, to_stdout: bool):
    stream = sys.stdout if to_stdout else sys.stderr
    for side, (lo, hi, spread) in table.summaries().items():
        print(f"{side}: min={lo:.6g} max={hi:.6g} spread={spread:.6g}", file=stream)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = config_from_args(argv)
        with thread_limit():
            return run(cfg)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
