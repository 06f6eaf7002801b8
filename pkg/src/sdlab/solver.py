"""Constructive solutions of the singular Dirichlet problem.

Two fixed-point maps are used:

* the cone map ``T(v) = tau S(K - lambda M v^-gamma)`` (alpha = gamma), which
  maps the order interval ``d <= v <= tau S(K)`` into itself when the M2 or
  HIP certificate holds; its fixed point is a subsolution;
* the problem map ``u -> S(K u^-alpha - lambda M u^-gamma)`` whose fixed
  points are the solutions themselves.

A fixed point of the cone map exists by compactness, but plain iteration
need not reach it, so a run that exhausts ``max_iter`` is inconclusive.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .certificates import suff_hip, suff_m2
from .greens import solve_poisson_1d
from .grid import (Domain1D, GradedGrid, GridFn, RadialGrid, _local_rule,
                   delta_negpow_norm_closed_form)
from .radial import solve_poisson_radial
from .validation import HypothesisViolation, SDLError

logger = logging.getLogger(__name__)

STATUSES = ("converged", "max_iter", "left_cone", "nonpositive")
CONE_SLACK = 1e-8
POSITIVITY_FLOOR = 1e-8
CLAMP_FACTOR = 1e-12


def poisson(h):
    """S(h) on whichever geometry h lives on."""
    if isinstance(h.grid, RadialGrid):
        return solve_poisson_radial(h)
    return solve_poisson_1d(h)


def _affine(u, v, omega):
    """(1 - omega) u + omega v, including node and derivative values."""
    if omega == 1.0:
        return v
    return u * (1.0 - omega) + v * omega


# ---------------------------------------------------------------------------
# supersolutions and scaling


def supersolution(K, alpha, c=None):
    """w = c S(K)^sigma with sigma = 1/(1+alpha), c >= sigma^(-1/(1+alpha)).

    w is a supersolution for every lambda > 0 since the -lambda M term only
    lowers the right-hand side.
    """
    if np.any(K.values < 0) or not np.any(K.values > 0):
        raise SDLError("the supersolution needs K >= 0, K not identically 0")
    sigma = 1.0 / (1.0 + alpha)
    c_min = sigma ** (-1.0 / (1.0 + alpha))
    if c is None:
        c = c_min
    elif c < c_min * (1 - 1e-14):
        raise SDLError(f"c = {c} is below the admissible threshold {c_min}")
    psi = poisson(K)
    vals = c * psi.values**sigma
    nodes = c * np.maximum(psi.node_values, 0.0) ** sigma
    deriv = c * sigma * psi.values ** (sigma - 1.0) * psi.deriv
    return GridFn(K.grid, vals, nodes, deriv)


def rescale_solution(v, c, gamma):
    """A solution for (cK, cM) mapped to one for (K, M): u = c^(-1/(1+gamma)) v."""
    if not c > 0:
        raise SDLError(f"scaling factor must be positive, got {c}")
    return v * c ** (-1.0 / (1.0 + gamma))


def subsolution_scale_for_alpha_gt_gamma(u, alpha, gamma):
    """(eps u, eps^(1+gamma)) with eps = min(1, 1/||u||_inf).

    For a solution u of the alpha = gamma problem at lambda = 1, eps u is a
    subsolution of the alpha > gamma problem for every lambda <= eps^(1+gamma).
    """
    if not alpha > gamma:
        raise HypothesisViolation(f"needs alpha > gamma (got {alpha}, {gamma})")
    eps = min(1.0, 1.0 / u.sup())
    return u * eps, eps ** (1.0 + gamma)


# ---------------------------------------------------------------------------
# residuals


def nonlinearity(u, K, M, alpha, gamma, lam):
    if np.any(u.values <= 0):
        raise SDLError("u must be positive at every interior abscissa")
    return K.values * u.values**-alpha - lam * M.values * u.values**-gamma


def hat_residuals(u, f_values):
    """Signed residuals  (int grad u . grad phi_i - int f phi_i) / ||grad phi_i||_1
    for the hat functions phi_i of the mesh nodes (interior ones on an
    interval; on a ball the centre node is included, its hat being a cone).
    """
    grid = u.grid
    s = np.tile(_local_s(grid), grid.n_cells)
    dm = grid.w * grid.measure
    F_up = (dm * f_values * s).reshape(grid.n_cells, -1).sum(axis=1)          # rising half
    F_down = (dm * f_values * (1.0 - s)).reshape(grid.n_cells, -1).sum(axis=1)  # falling half
    D = dm.reshape(grid.n_cells, -1).sum(axis=1)
    if isinstance(grid, GradedGrid) and u.node_values is not None:
        P = np.diff(u.node_values)
    elif u.deriv is not None:
        P = (dm * u.deriv).reshape(grid.n_cells, -1).sum(axis=1) / D * grid.h
    else:
        raise SDLError("the weak residual needs node values (interval) or derivatives (ball)")
    slope = P / grid.h  # mean of u' per cell, weighted by the measure
    # node i: rising on cell i-1 (phi' = 1/h), falling on cell i (phi' = -1/h)
    lhs = np.zeros(grid.n_cells + 1)
    lhs[1:] += slope * D / grid.h
    lhs[:-1] -= slope * D / grid.h
    rhs = np.zeros(grid.n_cells + 1)
    rhs[1:] += F_up
    rhs[:-1] += F_down
    norm = np.zeros(grid.n_cells + 1)
    norm[1:] += D / grid.h
    norm[:-1] += D / grid.h
    res = (lhs - rhs) / np.where(norm > 0, norm, 1.0)
    if isinstance(grid, RadialGrid):
        return res[:-1]
    return res[1:-1]


def _local_s(grid):
    return _local_rule(grid.order)[0]


def weak_residual(u, prob, K=None, M=None, signed=False):
    """max over hat test functions of the normalised weak residual of u.

    ``signed=True`` returns the vector of signed residuals instead; these are
    >= 0 for supersolutions and <= 0 for subsolutions.
    """
    if K is None or M is None:
        K, M = prob.sampled()
    f = nonlinearity(u, K, M, prob.alpha, prob.gamma, prob.lam)
    res = hat_residuals(u, f)
    return res if signed else float(np.max(np.abs(res)))


# ---------------------------------------------------------------------------
# constructive cone


@dataclass
class ConstructiveParams:
    variant: str
    tau: float
    beta: float
    r: float
    d_coefficient: float
    M_p: float
    upper_env: GridFn
    d: np.ndarray = None
    d_nodes: np.ndarray = None
    chain_ok: bool = True
    constants: dict = field(default_factory=dict)

    def summary(self):
        out = {k: getattr(self, k) for k in ("variant", "tau", "beta", "r", "d_coefficient", "M_p",
                                             "chain_ok")}
        out["constants"] = dict(sorted(self.constants.items()))
        return out


def constructive_cone(prob, variant="M2"):
    """tau, beta, r, d and the upper envelope of the invariant order interval.

    M2: tau = 2/((b-a) int K), beta = tau/(b-a),
        r = (beta ||delta^-gamma||_{p'} M_p gamma)^(1/(gamma+1)), d = r delta.
    HIP: S(K) scaled so that tau S(K) <= 1, c_K = tau int K delta,
        eps = min(2/c_K, 2(c_K - M_1)/(2 c_K + 1)), d = eps c_K delta/(b-a).
    """
    if not isinstance(prob.domain, Domain1D):
        raise SDLError("the constructive cone is one-dimensional")
    L = prob.domain.length
    K, M = prob.sampled()
    grid = K.grid
    S_K = poisson(K)
    if variant == "M2":
        report = suff_m2(prob)
        if not report.holds:
            raise HypothesisViolation("the M2 certificate fails; the cone is not guaranteed nonempty")
        g = prob.gamma
        tau = report.constants["tau"]
        beta = tau / L
        dnorm = delta_negpow_norm_closed_form(prob.domain, g, prob.p_conj)
        Mp = report.constants["M_p"]
        r = (beta * dnorm * Mp * g) ** (1.0 / (g + 1.0))
        upper = S_K * tau
        d_coef = r
        # tau S(K) >= beta (int K delta) delta >= r (g+1)/g delta >= d, and tau S(K) <= 1
        mid = beta * report.constants["int_K_delta"]
        chain = {
            "envelope_above_mid": bool(np.all(upper.values >= mid * grid.delta * (1 - 1e-10))),
            "mid_above_r_term": bool(mid >= r * (g + 1.0) / g * (1 - 1e-12)),
            "envelope_below_one": bool(upper.sup() <= 1.0 + 1e-12),
        }
        consts = dict(delta_negpow_norm=dnorm, beta_int_K_delta=mid, r_times_ratio=r * (g + 1) / g,
                      **chain)
    elif variant == "HIP":
        report = suff_hip(prob)
        if not report.holds:
            raise HypothesisViolation("the HIP certificate fails; the cone is not guaranteed nonempty")
        sup_SK = S_K.sup()
        tau = 1.0 if sup_SK <= 1.0 else 1.0 / sup_SK
        beta = tau / L
        mom = report.constants
        c_K = tau * mom["int_K_delta"]
        M1 = tau * max(mom["int_M_a"], mom["int_M_b"])
        eps = min(2.0 / c_K, 2.0 * (c_K - M1) / (2.0 * c_K + 1.0))
        d_coef = eps * c_K / L
        r = d_coef
        Mp = M1
        upper = S_K * tau
        chain = {
            "envelope_above_d": bool(np.all(upper.values >= d_coef * grid.delta * (1 - 1e-10))),
            "d_below_one": bool(d_coef * 0.5 * L <= 1.0),
            "envelope_below_one": bool(upper.sup() <= 1.0 + 1e-12),
        }
        consts = dict(c_K=c_K, M_1=M1, epsilon=eps, **chain)
    else:
        raise SDLError(f"unknown cone variant {variant!r}; expected M2 or HIP")
    return ConstructiveParams(
        variant=variant, tau=tau, beta=beta, r=r, d_coefficient=d_coef, M_p=Mp, upper_env=upper,
        d=d_coef * grid.delta, d_nodes=d_coef * grid.node_delta, chain_ok=all(chain.values()),
        constants=consts,
    )


# ---------------------------------------------------------------------------
# iteration


@dataclass
class SolveOutcome:
    u: GridFn
    iterations: int
    sup_norm_step: float
    weak_residual: float
    positivity_margin: float
    upper_margin: float
    cone_respected: bool
    status: str
    trace: list = field(default_factory=list)
    subsolution: GridFn = None
    clamped: bool = False
    notes: str = ""

    @property
    def converged(self):
        return self.status == "converged"

    def summary(self):
        return {
            "status": self.status,
            "iterations": self.iterations,
            "sup_norm_step": self.sup_norm_step,
            "weak_residual": self.weak_residual,
            "positivity_margin": self.positivity_margin,
            "upper_margin": self.upper_margin,
            "cone_respected": self.cone_respected,
            "clamped": self.clamped,
            "sup_u": self.u.sup() if self.u is not None else math.nan,
            "notes": self.notes,
        }


def _margins(u):
    grid = u.grid
    ratio = u.values / grid.delta
    return float(ratio.min()), float(ratio.max())


def _step_size(u, v):
    step = np.max(np.abs(u.values - v.values))
    if u.node_values is not None and v.node_values is not None:
        step = max(step, np.max(np.abs(u.node_values - v.node_values)))
    return float(step)


def _picard(u, rhs, tol, max_iter, relaxation, check, residual, residual_tol, trace):
    """Generic relaxed Picard loop.

    ``rhs(u)`` gives the right-hand side values, ``check(u)`` returns a status
    string when the iterate must be rejected.  Returns (u, status, iterations,
    step, clamped).
    """
    grid = u.grid
    clamped = False
    step = math.inf
    for it in range(1, max_iter + 1):
        new = poisson(GridFn(grid, rhs(u)))
        new = _affine(u, new, relaxation)
        step = _step_size(new, u)
        u = new
        if np.any(u.values <= 0):
            trace.append((it, step, math.nan))
            return u, "nonpositive", it, step, clamped
        floor = CLAMP_FACTOR * grid.delta
        if np.any(u.values < floor):
            clamped = True
            u = GridFn(grid, np.maximum(u.values, floor), u.node_values, u.deriv)
        bad = check(u)
        trace.append((it, step, float(np.min(u.values / grid.delta))))
        if bad:
            return u, bad, it, step, clamped
        if step <= tol:
            if residual(u) <= residual_tol:
                return u, "converged", it, step, clamped
    return u, "max_iter", max_iter, step, clamped


def fixed_point_iterate(prob, params=None, tol=1e-10, max_iter=500, relaxation=1.0,
                        residual_tol=1e-6):
    """Compute a solution by fixed-point iteration.

    Without ``params`` (or with params built for a generic start) the problem
    map is iterated from the supersolution c S(K)^sigma.  With M2/HIP
    ``params`` the cone map is iterated first from ``tau S(K)``, recording
    whether every iterate stays in [d, tau S(K)] (``cone_respected``); its
    fixed point v is a subsolution of the tau-scaled problem, from which the
    problem map is iterated, and the result is rescaled to (K, M).
    """
    if tol <= 0:
        raise SDLError("tol must be positive")
    if not 0 < relaxation <= 1:
        raise SDLError("relaxation must lie in (0, 1]")
    K, M = prob.sampled()
    a_, g_, lam = prob.alpha, prob.gamma, prob.lam
    trace = []

    if params is None:
        start = supersolution(K, a_)
        cone_ok = True

        def rhs(u):
            return K.values * u.values**-a_ - lam * M.values * u.values**-g_

        u, status, its, step, clamped = _picard(
            start, rhs, tol, max_iter, relaxation, lambda u: None,
            lambda u: weak_residual(u, prob, K, M), residual_tol, trace)
        return _finish(u, prob, K, M, its, step, status, cone_ok and not clamped, trace,
                       clamped=clamped)

    if not math.isclose(a_, g_, rel_tol=1e-12):
        raise HypothesisViolation("the cone construction needs alpha == gamma")
    tau = params.tau
    d, upper = params.d, params.upper_env

    def cone_rhs(v):
        return tau * (K.values - lam * M.values * v.values**-g_)

    def cone_check(v):
        lo_ok = np.all(v.values >= d * (1 - CONE_SLACK) - CONE_SLACK * 1e-6)
        hi_ok = np.all(v.values <= upper.values * (1 + CONE_SLACK) + CONE_SLACK * 1e-6)
        return None if lo_ok and hi_ok else "left_cone"

    has_M = bool(np.any(M.values > 0))
    if has_M and not np.all(d[M.values > 0] > 0):
        raise SDLError("the cone floor d must be positive where M > 0")

    v, status, its1, step, clamped = _picard(
        upper, cone_rhs, tol, max_iter, relaxation, cone_check, lambda v: 0.0, math.inf, trace)
    cone_ok = status == "converged" and not clamped
    if status != "converged":
        return _finish(rescale_solution(v, tau, g_), prob, K, M, its1, step, status, False, trace,
                       clamped=clamped, notes="cone iteration did not settle")

    # problem map on the tau-scaled data, started at the subsolution v
    Kt, Mt = K * tau, M * tau

    def rhs(u):
        return (Kt.values - lam * Mt.values) * u.values**-g_

    def sandwich(u):
        return None

    u, status, its2, step, clamped2 = _picard(
        v, rhs, tol, max_iter, relaxation, sandwich,
        lambda u: _scaled_residual(u, prob, K, M, tau), residual_tol, trace)
    above_sub = bool(np.all(u.values >= v.values - 1e-8 * max(1.0, v.sup())))
    out = _finish(rescale_solution(u, tau, g_), prob, K, M, its1 + its2, step, status,
                  cone_ok and not clamped2, trace, clamped=clamped or clamped2,
                  notes="" if above_sub else "solution not above the cone subsolution")
    out.subsolution = v
    return out


def _scaled_residual(u, prob, K, M, tau):
    return weak_residual(rescale_solution(u, tau, prob.gamma), prob, K, M)


def _finish(u, prob, K, M, its, step, status, cone_ok, trace, clamped=False, notes=""):
    if status in ("converged", "max_iter", "left_cone") and np.all(u.values > 0):
        res = weak_residual(u, prob, K, M)
        lo, hi = _margins(u)
    else:
        res, lo, hi = math.inf, math.nan, math.nan
    if status == "converged" and not lo > POSITIVITY_FLOOR:
        status = "nonpositive"
        notes = (notes + "; " if notes else "") + "positivity margin collapsed"
    logger.debug("solve finished: %s after %d iterations (step %.3e, residual %.3e)",
                 status, its, step, res)
    return SolveOutcome(u, its, step, res, lo, hi, bool(cone_ok), status, trace, clamped=clamped,
                        notes=notes)
