"""scikit-learn style wrappers around the functional core.

The "data" of a fit is the coefficient pair (K, M) rather than a sample
matrix; ``predict`` evaluates the fitted object at query points.  Hyper-
parameters follow the usual convention so ``get_params``/``set_params`` and
``sklearn.base.clone`` work.
"""

import math
from numbers import Real

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .certificates import ProblemSpec
from .grid import BallDomain, Domain1D, FunctionSpec
from .radial import estimate_morel_constants, validate_morel_constants
from .solver import constructive_cone, fixed_point_iterate
from .threshold import CONVERGED, EXCLUDED, INCONCLUSIVE, estimate_lambda0
from .validation import SDLError


def _as_function(f, name):
    if isinstance(f, FunctionSpec):
        return f
    if isinstance(f, dict):
        return FunctionSpec.from_dict(f)
    if isinstance(f, Real) and not isinstance(f, bool):
        return FunctionSpec.constant(float(f))
    raise SDLError(f"{name} must be a FunctionSpec, a dict or a number, got {type(f).__name__}")


def _domain(a, b, N):
    if N is None:
        return Domain1D(float(a), float(b))
    if a != 0:
        raise SDLError("balls are centred at 0; pass a=0 and b=R")
    return BallDomain(float(b), int(N))


def _query_points(X):
    X = check_array(np.asarray(X, dtype=float).reshape(-1, 1), ensure_2d=True)
    return X[:, 0]


class _ProblemMixin:
    def _problem(self, K, M):
        return ProblemSpec(_domain(self.a, self.b, self.N), _as_function(K, "K"),
                           _as_function(M, "M"), self.alpha, self.gamma, self.lam, self.p,
                           self.n, self.grading)


class SingularBVPSolver(_ProblemMixin, BaseEstimator):
    """Positive solution u of -u'' = K u^-alpha - lam M u^-gamma, u = 0 on the boundary.

    ``method`` is "picard" (problem map from the supersolution) or "M2"/"HIP"
    (cone iteration of the corresponding certificate, alpha = gamma only).
    Pass ``N`` to solve radially on the ball of radius ``b``.
    """

    def __init__(self, a=0.0, b=1.0, N=None, alpha=0.5, gamma=0.5, lam=1.0, p=2.0, n=400,
                 grading=None, method="picard", tol=1e-10, max_iter=500, relaxation=1.0):
        self.a = a
        self.b = b
        self.N = N
        self.alpha = alpha
        self.gamma = gamma
        self.lam = lam
        self.p = p
        self.n = n
        self.grading = grading
        self.method = method
        self.tol = tol
        self.max_iter = max_iter
        self.relaxation = relaxation

    def fit(self, K, M=0.0):
        prob = self._problem(K, M)
        if self.method == "picard":
            params = None
        elif self.method in ("M2", "HIP"):
            params = constructive_cone(prob, self.method)
        else:
            raise SDLError(f"unknown method {self.method!r}; expected picard, M2 or HIP")
        out = fixed_point_iterate(prob, params, tol=self.tol, max_iter=self.max_iter,
                                  relaxation=self.relaxation)
        self.problem_ = prob
        self.params_ = params
        self.outcome_ = out
        self.status_ = out.status
        self.weak_residual_ = out.weak_residual
        self.n_iter_ = out.iterations
        u = out.u
        xs = np.concatenate([u.grid.x, u.grid.nodes])
        us = np.concatenate([u.values, u.node_values if u.node_values is not None
                             else np.interp(u.grid.nodes, u.grid.x, u.values)])
        order = np.argsort(xs, kind="stable")
        self._xs, self._us = xs[order], us[order]
        if isinstance(prob.domain, Domain1D):
            self._us[0] = self._us[-1] = 0.0
        else:
            self._us[-1] = 0.0
        return self

    def predict(self, X):
        """u at the query points (piecewise-linear between quadrature points)."""
        check_is_fitted(self, "outcome_")
        x = _query_points(X)
        lo, hi = self._xs[0], self._xs[-1]
        if np.any((x < lo - 1e-12) | (x > hi + 1e-12)):
            raise SDLError(f"query points must lie in [{lo}, {hi}]")
        return np.interp(x, self._xs, self._us)

    def transform(self, X):
        return self.predict(X).reshape(-1, 1)


class Lambda0Estimator(_ProblemMixin, BaseEstimator):
    """Bisection bracket of the largest solvable lambda.

    ``predict`` labels query lambdas: solvable below the bracket, excluded
    above it, inconclusive inside.
    """

    def __init__(self, a=0.0, b=1.0, alpha=1.0, gamma=1.0, p=2.0, n=400, grading=None,
                 bracket=(0.01, 2.0), tol=1e-3, solve_tol=1e-10, max_iter=500, relaxation=None):
        self.a = a
        self.b = b
        self.alpha = alpha
        self.gamma = gamma
        self.p = p
        self.n = n
        self.grading = grading
        self.bracket = bracket
        self.tol = tol
        self.solve_tol = solve_tol
        self.max_iter = max_iter
        self.relaxation = relaxation

    # the problem mixin expects these two
    N = None
    lam = 1.0

    def fit(self, K, M):
        prob = self._problem(K, M)
        res = estimate_lambda0(prob, self.bracket, self.tol, self.solve_tol, self.max_iter,
                               self.relaxation)
        self.result_ = res
        self.lambda0_bracket_ = res.lambda0_bracket
        self.lambda0_ = 0.5 * sum(res.lambda0_bracket)
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        lam = _query_points(X)
        lo, hi = self.lambda0_bracket_
        out = np.full(lam.shape, INCONCLUSIVE, dtype=object)
        out[lam <= lo] = CONVERGED
        out[lam >= hi] = EXCLUDED
        return out


class MorelConstantsEstimator(BaseEstimator):
    """Constants c, C of c (int h delta) delta <= S(h) <= C ||h||_q delta on a ball."""

    def __init__(self, R=1.0, N=2, q=3.0, n=400):
        self.R = R
        self.N = N
        self.q = q
        self.n = n

    def fit(self, X=None, y=None):
        ball = BallDomain(float(self.R), int(self.N))
        consts = estimate_morel_constants(ball, self.q, self.n)
        self.constants_ = consts
        self.c_lower_, self.c_upper_ = consts.c_lower, consts.c_upper
        self.n_violations_ = validate_morel_constants(consts, ball, n=self.n)
        return self

    def score(self, X=None, y=None):
        """1 when the held-out family shows no violation, 0 otherwise."""
        check_is_fitted(self, "constants_")
        return float(self.n_violations_ == 0)

    @property
    def ratio_(self):
        check_is_fitted(self, "constants_")
        return self.c_lower_ / self.c_upper_ if math.isfinite(self.c_upper_) else 0.0
