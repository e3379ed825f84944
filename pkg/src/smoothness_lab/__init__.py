"""Generalized translations, moduli of smoothness and weighted polynomial approximation on [-1, 1]."""
from .core import (
    FuncRep,
    NumericalError,
    QuadratureRule,
    Regime,
    RegimeError,
    ValidationError,
    WeightedSpace,
    gauss_rule,
    weighted_norm,
)
from .jacobi import JacobiBasis, JacobiSeries, apply_D, eval_R, fourier_jacobi, to_jacobi
from .translation import DifferenceRequest, TranslationConfig, difference_r, kernel_B, operator_norm_probe, translate
from .smoothness import (
    KFunctionalResult,
    ModulusResult,
    SLWeight,
    H_apply,
    H_delta_apply,
    k_functional,
    kappa,
    modulus,
)
from .approx import ApproxResult, SolverConfig, bernstein_markov_probe, best_approx, en_from_D_bound
from .verify import RatioTable, TrialFamily, run_lemma_suite, verify_equivalence, verify_jackson

__version__ = "0.1.0"

__all__ = [
    "ApproxResult",
    "DifferenceRequest",
    "FuncRep",
    "H_apply",
    "H_delta_apply",
    "JacobiBasis",
    "JacobiSeries",
    "KFunctionalResult",
    "ModulusResult",
    "NumericalError",
    "QuadratureRule",
    "RatioTable",
    "Regime",
    "RegimeError",
    "SLWeight",
    "SolverConfig",
    "TranslationConfig",
    "TrialFamily",
    "ValidationError",
    "WeightedSpace",
    "apply_D",
    "bernstein_markov_probe",
    "best_approx",
    "difference_r",
    "en_from_D_bound",
    "eval_R",
    "fourier_jacobi",
    "gauss_rule",
    "k_functional",
    "kappa",
    "kernel_B",
    "modulus",
    "operator_norm_probe",
    "run_lemma_suite",
    "to_jacobi",
    "translate",
    "verify_equivalence",
    "verify_jackson",
    "weighted_norm",
]
