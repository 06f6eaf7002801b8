"""Empirical location of lambda0 = sup{lambda > 0 : the problem is solvable}.

The solvable set is an interval starting at 0, so a bracket with a solvable
lower end and a non-solvable upper end can be shrunk by bisection.  Whether
lambda0 itself is solvable is not decided here.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .certificates import lambda0_lower_algo, lambda_necessary_upper
from .grid import BallDomain
from .solver import fixed_point_iterate
from .validation import HypothesisViolation, SDLError, SupportError

logger = logging.getLogger(__name__)

CONVERGED = "converged_positive"
EXCLUDED = "no_solution_evidence"
INCONCLUSIVE = "inconclusive"

_STATUS_MAP = {
    "converged": CONVERGED,
    "left_cone": EXCLUDED,
    "nonpositive": EXCLUDED,
    "max_iter": INCONCLUSIVE,
}


def default_relaxation(prob):
    # plain Picard contracts like max(alpha, gamma) near a solution and
    # oscillates for exponents >= 1; averaging with this weight damps it
    return 1.0 / (1.0 + max(prob.alpha, prob.gamma))


def _solve_at(prob, lam, tol, max_iter, relaxation):
    if not lam > 0:
        raise SDLError(f"lambda must be positive, got {lam}")
    p = prob.with_(lam=float(lam))
    w = default_relaxation(p) if relaxation is None else relaxation
    return fixed_point_iterate(p, tol=tol, max_iter=max_iter, relaxation=w)


def exists_at(prob, lam, tol=1e-10, max_iter=500, relaxation=None):
    """Three-valued solvability test at lambda."""
    return _STATUS_MAP[_solve_at(prob, lam, tol, max_iter, relaxation).status]


def _analytic_bounds(prob):
    try:
        lower = lambda0_lower_algo(prob)
    except (HypothesisViolation, SupportError, SDLError) as exc:
        logger.debug("no algebraic lower bound: %s", exc)
        lower = 0.0
    if math.isinf(lower):
        lower = 0.0
    if prob.alpha <= prob.gamma:
        upper = lambda_necessary_upper(prob)
    else:
        upper = math.inf
    return lower, upper


@dataclass
class ThresholdResult:
    lambda0_bracket: tuple
    analytic_lower: float
    analytic_upper: float
    samples: list = field(default_factory=list)
    monotone_consistent: bool = True
    stopped: str = ""

    def to_dict(self):
        return {
            "lambda0_bracket": list(self.lambda0_bracket),
            "analytic_lower": self.analytic_lower,
            "analytic_upper": self.analytic_upper,
            "samples": [[lam, status] for lam, status in self.samples],
            "monotone_consistent": self.monotone_consistent,
            "stopped": self.stopped,
        }

    def excluded_by_bound(self, lam):
        """True when lambda is ruled out by the necessary bound, not just by iteration."""
        return lam >= self.analytic_upper


def monotone_consistent(samples):
    """No converged sample above an excluded one."""
    excluded = [lam for lam, s in samples if s == EXCLUDED]
    if not excluded:
        return True
    lowest = min(excluded)
    return not any(s == CONVERGED and lam > lowest for lam, s in samples)


def estimate_lambda0(prob, bracket, tol=1e-3, solve_tol=1e-10, max_iter=500, relaxation=None):
    """Bisection bracket of lambda0 of width <= tol * (initial width)."""
    if isinstance(prob.domain, BallDomain):
        raise SDLError("threshold estimation is one-dimensional; use the radial solver on balls")
    lo, hi = map(float, bracket)
    if not 0 < lo < hi:
        raise SDLError(f"bracket must satisfy 0 < low < high, got {bracket}")
    samples = []

    def probe(lam):
        s = exists_at(prob, lam, solve_tol, max_iter, relaxation)
        samples.append((lam, s))
        return s

    s_lo, s_hi = probe(lo), probe(hi)
    if s_lo != CONVERGED:
        raise SDLError(f"lower endpoint {lo} is not solvable (status {s_lo})")
    if s_hi != EXCLUDED:
        raise SDLError(f"upper endpoint not excluding: status at {hi} is {s_hi}")
    analytic_lower, analytic_upper = _analytic_bounds(prob)
    width0 = hi - lo
    stopped = ""
    while hi - lo > tol * width0:
        mid = 0.5 * (lo + hi)
        s = probe(mid)
        if s == CONVERGED:
            lo = mid
        elif s == EXCLUDED:
            hi = mid
        else:
            stopped = f"inconclusive at lambda = {mid:.12g}; bisection stopped"
            logger.warning(stopped)
            break
    if lo < analytic_upper < hi:
        # lambda >= the necessary bound is excluded outright
        hi = analytic_upper
    return ThresholdResult((lo, hi), analytic_lower, analytic_upper, samples,
                           monotone_consistent(samples), stopped)


def sweep(prob, axis, values, tol=1e-10, max_iter=500, relaxation=None, workers=None):
    """Rows (value, status, positivity_margin, residual), sorted by value."""
    values = [float(v) for v in values]
    if not values:
        raise SDLError("sweep needs at least one value")
    if any(not v > 0 for v in values):
        raise SDLError("sweep values must be positive")
    if axis not in ("lambda", "gamma"):
        raise SDLError(f"unknown sweep axis {axis!r}; expected lambda or gamma")
    tie = math.isclose(prob.alpha, prob.gamma, rel_tol=1e-12)

    def point(v):
        if axis == "lambda":
            p, lam = prob, v
        else:
            # keep alpha tied to gamma when they start equal
            p, lam = prob.with_(gamma=v, alpha=v if tie else prob.alpha), prob.lam
        out = _solve_at(p, lam, tol, max_iter, relaxation)
        return (v, _STATUS_MAP[out.status], out.positivity_margin, out.weak_residual)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(point, values))
    else:
        rows = [point(v) for v in values]
    return sorted(rows, key=lambda row: row[0])


def sweep_samples(rows):
    return [(v, s) for v, s, _, _ in rows]
