"""Positive solutions of -u'' = K u^-alpha - lambda M u^-gamma with Dirichlet data:
existence certificates, constructive fixed-point solutions, lambda thresholds,
and the radial theory on balls."""

__version__ = "0.1.0"

from .certificates import (CertificateReport, ProblemSpec, certify, certify_sign_changing,
                           lambda0_lower_algo, lambda_necessary_upper, suff_hip, suff_m2)
from .greens import cone_coefficients, solve_poisson_1d
from .grid import BallDomain, Domain1D, FunctionSpec, GradedGrid, GridFn, RadialGrid, build_grid
from .radial import (MorelConstants, estimate_morel_constants, radial_certify,
                     solve_poisson_radial, suff_bola)
from .solver import SolveOutcome, constructive_cone, fixed_point_iterate, weak_residual
from .threshold import ThresholdResult, estimate_lambda0, exists_at, sweep
from .validation import ConfigError, HypothesisViolation, SDLError, SupportError

__all__ = [
    "BallDomain", "CertificateReport", "ConfigError", "Domain1D", "FunctionSpec", "GradedGrid",
    "GridFn", "HypothesisViolation", "MorelConstants", "ProblemSpec", "RadialGrid", "SDLError",
    "SolveOutcome", "SupportError", "ThresholdResult", "build_grid", "certify",
    "certify_sign_changing", "cone_coefficients", "constructive_cone", "estimate_lambda0",
    "estimate_morel_constants", "exists_at", "fixed_point_iterate", "lambda0_lower_algo",
    "lambda_necessary_upper", "radial_certify", "solve_poisson_1d", "solve_poisson_radial",
    "suff_bola", "suff_hip", "suff_m2", "sweep", "weak_residual",
]
