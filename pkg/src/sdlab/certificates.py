"""Existence and nonexistence certificates for

    -u'' = K u^-alpha - lambda M u^-gamma,  u > 0 in (a, b),  u(a) = u(b) = 0.

Each certificate evaluates one inequality and reports both sides together
with every intermediate constant, so a failing certificate can be read off
directly.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import (BallDomain, Domain1D, FunctionSpec, GridFn, auto_grading, build_grid,
                   integrate, lp_norm, sample)
from .validation import (HypothesisViolation, SDLError, SupportError, check_exponent_p,
                         check_nonnegative_values, check_positive, conjugate)

CERTIFICATE_IDS = ("M2", "HIP", "ALGO_LOWER", "NECESSARY_UPPER", "SIGN_CHANGING_I",
                   "SIGN_CHANGING_II", "SIGN_CHANGING_NEC", "BOLA", "ALGO_LOWER_RADIAL",
                   "NECESSARY_UPPER_RADIAL")
SUPPORT_THRESHOLD = 1e-14


@dataclass(frozen=True)
class ProblemSpec:
    """Data of the singular Dirichlet problem plus the mesh it is sampled on.

    ``p`` is the integrability exponent of M (>= 2, or inf).  ``grading=None``
    picks a grading that resolves the strongest singular power in play.
    """

    domain: object
    K: FunctionSpec
    M: FunctionSpec
    alpha: float
    gamma: float
    lam: float = 1.0
    p: float = 2.0
    n: int = 400
    grading: float = None

    def __post_init__(self):
        check_positive(self.alpha, "alpha")
        check_positive(self.gamma, "gamma")
        check_positive(self.lam, "lambda")
        check_exponent_p(self.p)
        if not isinstance(self.domain, (Domain1D, BallDomain)):
            raise SDLError(f"unsupported domain {self.domain!r}")

    def with_(self, **changes):
        return replace(self, **changes)

    @property
    def p_conj(self):
        return conjugate(self.p)

    def default_grading(self):
        if self.grading is not None:
            return self.grading
        return auto_grading(max(self.alpha, self.gamma, self.gamma * self.p_conj), self.n)

    def grid(self):
        return _grid_cache(self.domain, self.n, self.default_grading())

    def sampled(self):
        """(K, M) on the problem grid, checked nonnegative with K not identically 0."""
        grid = self.grid()
        K = sample(self.K, grid)
        M = sample(self.M, grid)
        check_nonnegative_values(K.values, "K")
        check_nonnegative_values(M.values, "M")
        if integrate(K) <= 0:
            raise SDLError("K must not vanish identically")
        return K, M


_GRIDS = {}


def _grid_cache(domain, n, grading):
    key = (domain, n, grading)
    if key not in _GRIDS:
        if len(_GRIDS) > 64:
            _GRIDS.clear()
        _GRIDS[key] = build_grid(domain, n, grading)
    return _GRIDS[key]


@dataclass
class CertificateReport:
    certificate_id: str
    lhs: float
    rhs: float
    holds: bool
    strict: bool
    margin: float
    constants: dict = field(default_factory=dict)
    notes: str = ""

    def to_dict(self):
        return {
            "certificate_id": self.certificate_id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "holds": self.holds,
            "strict": self.strict,
            "margin": self.margin,
            "constants": dict(sorted(self.constants.items())),
            "notes": self.notes,
        }


def _report(cid, lhs, rhs, strict, constants, notes=""):
    # differences at rounding level count as equality
    tie = math.isfinite(rhs) and abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs), 1e-300)
    holds = (lhs < rhs and not tie) if strict else (lhs <= rhs or tie)
    margin = rhs - lhs if math.isfinite(rhs) else math.inf
    return CertificateReport(cid, float(lhs), float(rhs), bool(holds), strict, float(margin),
                             constants, notes)


def moments(K, M):
    """The delta- and endpoint-weighted integrals used throughout."""
    return {
        "int_K": integrate(K),
        "int_K_delta": integrate(K, "delta"),
        "int_K_a": integrate(K, "left"),
        "int_K_b": integrate(K, "right"),
        "int_M": integrate(M),
        "int_M_delta": integrate(M, "delta"),
        "int_M_a": integrate(M, "left"),
        "int_M_b": integrate(M, "right"),
    }


def endpoint_weighted_norm(M, p):
    """max(||(x-a) M||_p, ||(b-x) M||_p)."""
    grid = M.grid
    Ma = GridFn(grid, (grid.x - grid.domain.a) * M.values)
    Mb = GridFn(grid, (grid.domain.b - grid.x) * M.values)
    return max(lp_norm(Ma, p), lp_norm(Mb, p))


def _require_interval(prob):
    if not isinstance(prob.domain, Domain1D):
        raise SDLError("this certificate is one-dimensional; use the radial certificates on balls")


def _require_gamma_range(gamma, p):
    limit = 1.0 / conjugate(p)
    if not 0 < gamma < limit:
        raise HypothesisViolation(
            f"gamma = {gamma} must lie in (0, (p-1)/p) = (0, {limit:.6g}) for p = {p}")


def c_gamma_const(gamma, p, domain):
    """c_{gamma,p,a,b} = gamma^gamma/(gamma+1)^(gamma+1) (1-gamma p')^(1/p') / (b-a)^(gamma+1/p')."""
    _require_gamma_range(gamma, p)
    pc = conjugate(p)
    return (gamma**gamma / (gamma + 1.0) ** (gamma + 1.0)
            * (1.0 - gamma * pc) ** (1.0 / pc) / domain.length ** (gamma + 1.0 / pc))


def suff_m2(prob, cid="M2"):
    """Sufficient condition for alpha = gamma, lambda <= 1, M in L^p:

        max(||M_a||_p, ||M_b||_p) <= c_{gamma,p,a,b} (int K delta)^(1+gamma) / (int K)^gamma
    """
    _require_interval(prob)
    if not math.isclose(prob.alpha, prob.gamma, rel_tol=1e-12):
        raise HypothesisViolation(f"M2 needs alpha == gamma (got {prob.alpha}, {prob.gamma})")
    g = prob.gamma
    c = c_gamma_const(g, prob.p, prob.domain)
    K, M = prob.sampled()
    mom = moments(K, M)
    Mp = endpoint_weighted_norm(M, prob.p)
    rhs = c * mom["int_K_delta"] ** (1.0 + g) / mom["int_K"] ** g
    tau = 2.0 / (prob.domain.length * mom["int_K"])
    consts = dict(mom, c_gamma_p=c, M_p=Mp, tau=tau, p=prob.p, p_conj=prob.p_conj,
                  lambda_covered=bool(prob.lam <= 1.0))
    return _report(cid, Mp, rhs, False, consts,
                   "existence for every lambda <= 1 when it holds")


def suff_hip(prob, cid="HIP"):
    """max(int M_a, int M_b) < int K delta: existence for small gamma, lambda <= 1."""
    _require_interval(prob)
    K, M = prob.sampled()
    mom = moments(K, M)
    lhs = max(mom["int_M_a"], mom["int_M_b"])
    consts = dict(mom, lambda_covered=bool(prob.lam <= 1.0))
    return _report(cid, lhs, mom["int_K_delta"], True, consts,
                   "existence for gamma in (0, gamma0] and lambda <= 1; gamma0 is not quantified")


def support_of(f, grid):
    """(lo, hi) bounding {f > 0}: declared by the kind, else by thresholding samples."""
    if isinstance(f, FunctionSpec):
        declared = f.declared_support(grid.domain)
        if declared is not None:
            return declared
        values = f(grid.x, grid.domain)
    else:
        values = f.values
    mask = np.abs(values) > SUPPORT_THRESHOLD
    if not mask.any():
        return ()
    xs = grid.x[mask]
    lo, hi = xs.min(), xs.max()
    # a sample in the first/last cell means the support reaches the boundary
    if lo <= grid.nodes[1]:
        lo = grid.domain.a
    if hi >= grid.nodes[-2]:
        hi = grid.domain.b
    return (float(lo), float(hi))


def support_distance(f, grid):
    """dist({f > 0}, boundary); inf for the zero function."""
    supp = support_of(f, grid)
    if supp == ():
        return math.inf
    lo, hi = supp
    if isinstance(grid.domain, BallDomain):
        return grid.domain.R - hi
    return min(lo - grid.domain.a, grid.domain.b - hi)


def lambda0_lower_algo_report(prob):
    """Lower bound for lambda0 valid for any alpha, gamma > 0 when {M > 0} is
    compactly inside the interval and the HIP inequality holds:

        lambda0 >= (dist/(b-a))^gamma (int K delta - max(int M_a, int M_b))^gamma
                   / ((max(int K_a, int K_b) - int M delta)/2)^(alpha(1+gamma)/(1+alpha))
    """
    _require_interval(prob)
    K, M = prob.sampled()
    grid = K.grid
    mom = moments(K, M)
    dist = support_distance(prob.M, grid)
    consts = dict(mom, dist_support=dist)
    if math.isinf(dist):
        consts["degenerate"] = True
        return _report("ALGO_LOWER", prob.lam, math.inf, False, consts,
                       "M vanishes identically: no finite lower bound, every lambda is admissible")
    if dist <= 0:
        raise SupportError("the support of M touches the boundary; the lambda0 lower bound needs "
                           "{M > 0} compactly contained in the interval")
    gap = mom["int_K_delta"] - max(mom["int_M_a"], mom["int_M_b"])
    if not gap > 0:
        raise HypothesisViolation(f"the HIP inequality fails (int K delta - max(int M_a, int M_b) = {gap:.6g})")
    a_, g_ = prob.alpha, prob.gamma
    top = 0.5 * (max(mom["int_K_a"], mom["int_K_b"]) - mom["int_M_delta"])
    bound = ((dist / prob.domain.length) ** g_ * gap**g_
             / top ** (a_ * (1.0 + g_) / (1.0 + a_)))
    consts.update(hip_gap=gap, upper_factor=top, bound=bound)
    return _report("ALGO_LOWER", prob.lam, bound, False, consts,
                   "holds means lambda is at most the certified lower bound for lambda0")


def lambda0_lower_algo(prob):
    return lambda0_lower_algo_report(prob).rhs


def lambda_necessary_upper_report(prob):
    """For 0 < alpha <= gamma every solvable lambda satisfies

        lambda < ((alpha+1)/2 max(int K_a, int K_b))^((gamma-alpha)/(alpha+1)) int K delta / int M delta
    """
    _require_interval(prob)
    if prob.alpha > prob.gamma:
        raise HypothesisViolation(f"the necessary bound needs alpha <= gamma (got {prob.alpha} > {prob.gamma})")
    K, M = prob.sampled()
    mom = moments(K, M)
    consts = dict(mom)
    if mom["int_M_delta"] <= 0:
        consts["degenerate"] = True
        return _report("NECESSARY_UPPER", prob.lam, math.inf, True, consts,
                       "M vanishes identically: no finite upper bound")
    a_, g_ = prob.alpha, prob.gamma
    u_bound = 0.5 * (a_ + 1.0) * max(mom["int_K_a"], mom["int_K_b"])
    bound = u_bound ** ((g_ - a_) / (a_ + 1.0)) * mom["int_K_delta"] / mom["int_M_delta"]
    consts.update(sup_u_bound=u_bound ** (1.0 / (a_ + 1.0)), bound=bound)
    return _report("NECESSARY_UPPER", prob.lam, bound, True, consts,
                   "fails means lambda is excluded: no solution exists there")


def lambda_necessary_upper(prob):
    return lambda_necessary_upper_report(prob).rhs


def sign_changing_problem(m, gamma, p, domain, n=400, grading=None):
    """The problem -u'' = m u^-gamma written as K = m+, M = m-, alpha = gamma, lambda = 1."""
    return ProblemSpec(domain, _PartFunction(m, +1), _PartFunction(m, -1), gamma, gamma, 1.0, p,
                       n, grading)


class _PartFunction(FunctionSpec):
    """Positive or negative part of a catalogue function."""

    def __init__(self, base, sign):
        object.__setattr__(self, "kind", base.kind)
        object.__setattr__(self, "params", base.params)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "sign", sign)

    def __call__(self, x, domain):
        return np.maximum(self.sign * self.base(x, domain), 0.0)

    def declared_support(self, domain):
        return None

    def to_dict(self):
        return {"part": "positive" if self.sign > 0 else "negative", "of": self.base.to_dict()}

    def __hash__(self):
        return hash((self.base, self.sign))

    def __eq__(self, other):
        return isinstance(other, _PartFunction) and (self.base, self.sign) == (other.base, other.sign)


def certify_sign_changing(m, gamma, p, domain, n=400, grading=None):
    """Three reports for -u'' = m u^-gamma with m = m+ - m-:

    SIGN_CHANGING_I (M2 on (m+, m-)), SIGN_CHANGING_II (HIP on (m+, m-)) and
    SIGN_CHANGING_NEC, the necessary condition int m- delta < int m+ delta.
    """
    if not isinstance(domain, Domain1D):
        raise SDLError("certify_sign_changing is one-dimensional; on balls use the radial screen")
    prob = sign_changing_problem(m, gamma, p, domain, n, grading)
    grid = prob.grid()
    msamp = sample(m, grid)
    if not np.any(msamp.values != 0):
        raise SDLError("m must not vanish identically")
    plus, minus = msamp.positive_part(), msamp.negative_part()
    if integrate(plus) <= 0:
        # no positive part: only the necessary condition can be evaluated
        lhs, rhs = integrate(minus, "delta"), 0.0
        nec = _report("SIGN_CHANGING_NEC", lhs, rhs, True, {"int_mminus_delta": lhs, "int_mplus_delta": rhs})
        nan = math.nan
        fail = dict(notes="m+ vanishes identically")
        return [CertificateReport("SIGN_CHANGING_I", nan, 0.0, False, False, nan, {}, fail["notes"]),
                CertificateReport("SIGN_CHANGING_II", nan, 0.0, False, True, nan, {}, fail["notes"]),
                nec]
    r1 = suff_m2(prob, cid="SIGN_CHANGING_I")
    r2 = suff_hip(prob, cid="SIGN_CHANGING_II")
    lhs, rhs = integrate(minus, "delta"), integrate(plus, "delta")
    nec = _report("SIGN_CHANGING_NEC", lhs, rhs, True,
                  {"int_mminus_delta": lhs, "int_mplus_delta": rhs},
                  "fails means no solution exists")
    return [r1, r2, nec]


def certify(prob):
    """Every one-dimensional certificate applicable to ``prob``, in a fixed order."""
    reports = []
    if math.isclose(prob.alpha, prob.gamma, rel_tol=1e-12):
        try:
            reports.append(suff_m2(prob))
        except HypothesisViolation as exc:
            reports.append(CertificateReport("M2", math.nan, math.nan, False, False, math.nan, {},
                                             f"not applicable: {exc}"))
    reports.append(suff_hip(prob))
    try:
        reports.append(lambda0_lower_algo_report(prob))
    except (HypothesisViolation, SupportError) as exc:
        reports.append(CertificateReport("ALGO_LOWER", prob.lam, math.nan, False, False, math.nan,
                                         {}, f"not applicable: {exc}"))
    if prob.alpha <= prob.gamma:
        reports.append(lambda_necessary_upper_report(prob))
    return reports
