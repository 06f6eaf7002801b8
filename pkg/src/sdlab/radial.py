"""Radial theory on balls B_R in R^N, N >= 2.

Radial data f(|x|) is sampled on [0, R].  The solution operator reduces to
-(r^(N-1) phi')' = r^(N-1) h with phi'(0) = 0, phi(R) = 0, which is solved by
two cumulative integrations:

    F(r) = int_0^r t^(N-1) h(t) dt,   phi(r) = int_r^R s^(1-N) F(s) ds.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import beta as beta_fn

from .certificates import CertificateReport, _report, support_distance
from .grid import BallDomain, GridFn, RadialGrid, build_grid, integrate, lp_norm, sample
from .validation import HypothesisViolation, SDLError, SupportError

__all__ = [
    "BallDomain", "MorelConstants", "solve_poisson_radial", "estimate_morel_constants",
    "validate_morel_constants", "suff_bola", "hippp_constant", "bola_constant",
    "delta_negpow_norm_ball", "lambda_necessary_upper_radial", "lambda0_lower_algo_radial",
    "sign_changing_screen", "estimation_family", "heldout_family",
]


def solve_poisson_radial(h, ball=None):
    """phi = S(h) for radial h on the ball of ``h.grid``."""
    grid = h.grid
    if not isinstance(grid, RadialGrid):
        raise SDLError("solve_poisson_radial needs a radial grid")
    if ball is not None and ball != grid.domain:
        raise SDLError("ball does not match the grid's ball")
    N = grid.domain.N
    F_n, F_x = grid.cumulative_rpow(h.values, N - 1)
    flux_x = F_x / grid.x ** (N - 1)
    phi_n, phi_x = grid.cumulative_right(flux_x)
    phi_n[-1] = 0.0
    return GridFn(grid, phi_x, phi_n, -flux_x)


def boundary_flux(h):
    """-phi'(R) = R^(1-N) int_0^R t^(N-1) h dt."""
    grid = h.grid
    N, R = grid.domain.N, grid.domain.R
    F_n, _ = grid.cumulative_rpow(h.values, N - 1)
    return F_n[-1] / R ** (N - 1)


# ---------------------------------------------------------------------------
# two-sided delta comparison constants


@dataclass
class MorelConstants:
    """c_lower, c_upper with c_lower (int h delta) delta <= S(h) <= c_upper ||h||_q delta.

    ``provenance`` is ``"estimated"`` or ``"user_supplied"``.  Estimated
    constants certify the inequality for radial data only.
    """

    c_lower: float
    c_upper: float
    provenance: str = "estimated"
    q: float = math.inf
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.c_lower > 0 and self.c_upper > 0):
            raise SDLError("Morel constants must be positive")
        if self.provenance not in ("estimated", "user_supplied"):
            raise SDLError(f"unknown provenance {self.provenance!r}")

    @property
    def ratio(self):
        return self.c_lower / self.c_upper

    def to_dict(self):
        return {"c_lower": self.c_lower, "c_upper": self.c_upper, "provenance": self.provenance,
                "q": self.q, "details": dict(sorted(self.details.items()))}


def _radial_fn(kind, R, **kw):
    if kind == "const":
        return lambda r: np.full_like(r, kw["c"])
    if kind == "rpow":
        return lambda r: (r / R) ** kw["s"]
    if kind == "dpow":
        return lambda r: (1.0 - r / R) ** kw["t"]
    if kind == "annulus":
        c, w = kw["center"] * R, kw["width"] * R
        return lambda r: np.where(np.abs(r - c) < w, np.cos(0.5 * np.pi * (r - c) / w) ** 2, 0.0)
    raise ValueError(kind)


def estimation_family(R):
    fam = [_radial_fn("const", R, c=1.0)]
    fam += [_radial_fn("rpow", R, s=s) for s in (0.5, 1.0, 2.0, 4.0, 8.0)]
    fam += [_radial_fn("dpow", R, t=t) for t in (0.5, 1.0, 2.0, 4.0)]
    fam += [_radial_fn("annulus", R, center=c, width=w)
            for c in (0.1, 0.3, 0.5, 0.7, 0.9) for w in (0.05, 0.1)]
    return fam


def heldout_family(R):
    """Twenty radial test functions not used for estimation."""
    fam = [_radial_fn("const", R, c=2.5)]
    fam += [_radial_fn("rpow", R, s=s) for s in (0.25, 1.5, 3.0, 6.0)]
    fam += [_radial_fn("dpow", R, t=t) for t in (0.25, 1.5, 3.0)]
    fam += [_radial_fn("annulus", R, center=c, width=w)
            for c, w in ((0.05, 0.05), (0.2, 0.15), (0.4, 0.03), (0.6, 0.2),
                         (0.8, 0.08), (0.95, 0.04), (0.5, 0.45))]
    fam += [
        lambda r: 1.0 + np.cos(3 * np.pi * r / R),
        lambda r: (r / R) * (1.0 - r / R),
        lambda r: np.exp(-10 * (r / R - 0.6) ** 2),
        lambda r: 0.1 + (r / R) ** 2 * np.exp(-(r / R)),
        lambda r: np.abs(np.sin(5 * r / R)),
    ]
    return fam


def _ratios(grid, h_vals, q):
    """(inf S(h)/(delta int h delta), sup S(h)/(delta ||h||_q)) for one function."""
    h = GridFn(grid, h_vals)
    phi = solve_poisson_radial(h)
    ratio = np.concatenate([phi.values / grid.delta, [boundary_flux(h)]])
    return ratio.min() / integrate(h, "delta"), ratio.max() / lp_norm(h, q)


def _kernel_constants(grid, q):
    """Point-mass limits of the two ratios over all nonnegative radial h.

    The radial Green function against dx is Phi(max(r, t)) / omega with
    Phi(x) = int_x^R s^(1-N) ds.  Its lower ratio has infimum 1/(omega R^N);
    the upper one is sup_r ||Phi(max(r, .))||_{L^q'} / (omega delta(r)).
    """
    ball = grid.domain
    N, R, omega = ball.N, ball.R, ball.omega
    c_kernel = 1.0 / (omega * R**N)
    qc = 1.0 if math.isinf(q) else q / (q - 1.0)

    def Phi(x):
        if N == 2:
            return np.log(R / x)
        return (x ** (2 - N) - R ** (2 - N)) / (N - 2)

    fine = build_grid(ball, 2 * grid.n, grid.grading)
    t, wt = fine.x, fine.w * fine.measure
    Phi_t = Phi(t)
    rs = np.concatenate([grid.x, grid.nodes[:-1]])
    best = R ** (1 - N) * ball.volume ** (1.0 / qc) / omega  # r -> R limit
    for r in rs:
        g = np.where(t < r, Phi(r), Phi_t) if r > 0 else Phi_t
        val = np.sum(wt * g**qc) ** (1.0 / qc) / (omega * (R - r))
        best = max(best, val)
    return c_kernel, float(best)


def estimate_morel_constants(ball, q, n=400, c_lower=None, c_upper=None):
    """Constants for the two-sided delta comparison on a ball, radial data.

    Passing both ``c_lower`` and ``c_upper`` returns them unchanged with
    provenance ``user_supplied``.  Otherwise the lower constant is the minimum
    of the test-family ratios and the point-mass (Green kernel) limit, and the
    upper one the maximum of both; the kernel limits make the estimate cover
    every nonnegative radial h, not only the family.
    """
    q = float(q)
    if not q > ball.N:
        raise SDLError(f"q must exceed N = {ball.N}, got {q}")
    if c_lower is not None and c_upper is not None:
        return MorelConstants(float(c_lower), float(c_upper), "user_supplied", q)
    grid = build_grid(ball, n, 2.0)
    lows, highs = [], []
    for f in estimation_family(ball.R):
        lo, hi = _ratios(grid, f(grid.x), q)
        lows.append(lo)
        highs.append(hi)
    ck, Ck = _kernel_constants(grid, q)
    details = {"family_min_lower": float(min(lows)), "family_max_upper": float(max(highs)),
               "kernel_lower": ck, "kernel_upper": Ck, "family_size": len(lows)}
    return MorelConstants(min(min(lows), ck), max(max(highs), Ck), "estimated", q, details)


def validate_morel_constants(consts, ball, family=None, n=400, slack=1e-9):
    """Number of violations of the two-sided comparison over a test family."""
    grid = build_grid(ball, n, 2.0)
    family = heldout_family(ball.R) if family is None else family
    violations = 0
    for f in family:
        h = GridFn(grid, f(grid.x))
        phi = solve_poisson_radial(h)
        low = consts.c_lower * integrate(h, "delta") * grid.delta
        high = consts.c_upper * lp_norm(h, consts.q) * grid.delta
        if np.any(phi.values < low - slack) or np.any(phi.values > high + slack):
            violations += 1
    return violations


# ---------------------------------------------------------------------------
# certificates on balls


def delta_negpow_norm_ball(ball, gamma, q):
    """||delta^-gamma||_{L^q(B_R)} = (omega R^(N - gamma q) B(N, 1 - gamma q))^(1/q)."""
    N, R = ball.N, ball.R
    if gamma * q >= 1:
        raise SDLError(f"delta^-{gamma} is not in L^{q} on a ball (gamma*q >= 1)")
    return (ball.omega * R ** (N - gamma * q) * beta_fn(N, 1.0 - gamma * q)) ** (1.0 / q)


def _gamma_factor(gamma):
    return gamma**gamma / (gamma + 1.0) ** (gamma + 1.0)


def bola_constant(gamma, ball, ratio):
    """c_{Omega,gamma,N} with the exact ||delta^-gamma||_{L^N} of the ball."""
    return (ratio ** (1.0 + gamma) * _gamma_factor(gamma) * (2.0 / ball.diameter) ** gamma
            / delta_negpow_norm_ball(ball, gamma, ball.N))


def hippp_constant(gamma, N, R, ratio, omega=None):
    """Closed-form lower bound for c_{Omega,gamma,N} on B_R."""
    if omega is None:
        omega = BallDomain(R, N).omega
    if not 0 < gamma < 1.0 / N:
        raise HypothesisViolation(f"gamma must lie in (0, 1/N), got {gamma}")
    return ratio ** (1.0 + gamma) * _gamma_factor(gamma) / R * ((1.0 - gamma * N) / omega) ** (1.0 / N)


_BOUNDED_KINDS = ("constant", "bump", "sinesign", "table")


def _ball_sampled(prob):
    if not isinstance(prob.domain, BallDomain):
        raise SDLError("radial certificates need a ball domain")
    return prob.sampled()


def suff_bola(prob, consts):
    """||M||_inf < c_{Omega,gamma,N} (int K delta)^(1+gamma) / ||K||_p^gamma  (alpha = gamma)."""
    K, M = _ball_sampled(prob)
    ball = prob.domain
    g = prob.gamma
    if not math.isclose(prob.alpha, g, rel_tol=1e-12):
        raise HypothesisViolation("the ball certificate needs alpha == gamma")
    if not 0 < g < 1.0 / ball.N:
        raise HypothesisViolation(f"gamma must lie in (0, 1/N) = (0, {1.0 / ball.N:.6g})")
    kind = getattr(prob.M, "kind", None)
    if kind == "power" and min(prob.M.p["s"], prob.M.p["t"]) < 0:
        raise HypothesisViolation("M must be bounded for the ball certificate")
    if kind is not None and kind not in _BOUNDED_KINDS + ("power",):
        raise HypothesisViolation("M must be bounded for the ball certificate")
    c_gen = bola_constant(g, ball, consts.ratio)
    c_low = hippp_constant(g, ball.N, ball.R, consts.ratio, ball.omega)
    int_K_delta = integrate(K, "delta")
    K_p = lp_norm(K, prob.p)
    lhs = lp_norm(M, math.inf)
    rhs = c_gen * int_K_delta ** (1.0 + g) / K_p**g
    constants = {
        "c_omega_gamma_N": c_gen, "hippp_lower_bound": c_low,
        "delta_negpow_LN_closed": delta_negpow_norm_ball(ball, g, ball.N),
        "int_K_delta": int_K_delta, "K_p": K_p, "c_lower": consts.c_lower,
        "c_upper": consts.c_upper, "provenance": consts.provenance,
    }
    notes = "empirical certificate (estimated constants)" if consts.provenance == "estimated" else ""
    return _report("BOLA", lhs, rhs, True, constants, notes)


def _inf_ratio(SK, SM, fluxK, fluxM):
    r = np.concatenate([SK.values / SM.values, [fluxK / fluxM]])
    return float(r.min())


def lambda_necessary_upper_radial(prob, consts):
    """lambda < (R C (alpha+1) ||K||_p)^((gamma-alpha)/(alpha+1)) inf S(K)/S(M)."""
    K, M = _ball_sampled(prob)
    if prob.alpha > prob.gamma:
        raise HypothesisViolation("the necessary bound needs alpha <= gamma")
    if integrate(M) <= 0:
        return math.inf
    ball = prob.domain
    SK, SM = solve_poisson_radial(K), solve_poisson_radial(M)
    ratio = _inf_ratio(SK, SM, boundary_flux(K), boundary_flux(M))
    a_, g_ = prob.alpha, prob.gamma
    base = 0.5 * ball.diameter * consts.c_upper * (a_ + 1.0) * lp_norm(K, prob.p)
    return base ** ((g_ - a_) / (a_ + 1.0)) * ratio


def lambda0_lower_algo_radial(prob, consts):
    """Lower bound for lambda0 on a ball, M compactly supported inside.

    Uses the factor (c int K delta - C ||M||_p)^gamma, consistent with the
    hypothesis ||M||_p < (c/C) int K delta.
    """
    K, M = _ball_sampled(prob)
    ball = prob.domain
    dist = support_distance(prob.M, K.grid)
    if math.isinf(dist):
        return math.inf
    if dist <= 0:
        raise SupportError("the support of M touches the sphere |x| = R")
    c, C = consts.c_lower, consts.c_upper
    gap = c * integrate(K, "delta") - C * lp_norm(M, prob.p)
    if not gap > 0:
        raise HypothesisViolation("||M||_p < (c/C) int K delta fails")
    top = 0.5 * ball.diameter * (C * lp_norm(K, prob.p) - c * integrate(M, "delta"))
    if not top > 0:
        raise HypothesisViolation("the upper factor C||K||_p - c int M delta is not positive")
    a_, g_ = prob.alpha, prob.gamma
    return dist**g_ * gap**g_ / top ** (a_ * (1.0 + g_) / (1.0 + a_))


def sign_changing_screen(m, ball, n=400):
    """Necessary condition for -Delta u = m u^-gamma on a ball: S(m) > 0 inside.

    Returns (passes, min of S(m)/delta over the open ball).
    """
    grid = build_grid(ball, n, 2.0)
    ms = sample(m, grid)
    phi = solve_poisson_radial(ms)
    ratio = np.concatenate([phi.values / grid.delta, [boundary_flux(ms)]])
    return bool(np.all(phi.values > 0) and ratio.min() > 0), float(ratio.min())


def radial_certify(prob, consts):
    """All ball certificates that apply to ``prob``, as reports."""
    reports = []
    try:
        reports.append(suff_bola(prob, consts))
    except HypothesisViolation as exc:
        reports.append(CertificateReport("BOLA", math.nan, math.nan, False, True, math.nan, {},
                                         f"not applicable: {exc}"))
    try:
        lb = lambda0_lower_algo_radial(prob, consts)
        reports.append(_report("ALGO_LOWER_RADIAL", prob.lam, lb, False,
                               {"provenance": consts.provenance}))
    except (HypothesisViolation, SupportError) as exc:
        reports.append(CertificateReport("ALGO_LOWER_RADIAL", prob.lam, math.nan, False, False,
                                         math.nan, {}, f"not applicable: {exc}"))
    if prob.alpha <= prob.gamma:
        ub = lambda_necessary_upper_radial(prob, consts)
        reports.append(_report("NECESSARY_UPPER_RADIAL", prob.lam, ub, True,
                               {"provenance": consts.provenance}))
    return reports
