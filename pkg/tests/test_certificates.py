import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st
from scipy import integrate as sint

from conftest import SEED, random_nonnegative
from sdlab.certificates import (ProblemSpec, c_gamma_const, certify, certify_sign_changing,
                                endpoint_weighted_norm, lambda0_lower_algo,
                                lambda0_lower_algo_report, lambda_necessary_upper,
                                lambda_necessary_upper_report, moments, suff_hip, suff_m2,
                                support_distance)
from sdlab.grid import BallDomain, Domain1D, FunctionSpec, build_grid
from sdlab.validation import HypothesisViolation, SDLError, SupportError

UNIT = Domain1D(0.0, 1.0)
ONE = FunctionSpec.constant(1.0)


def prob(K=ONE, M=FunctionSpec.constant(0.1), alpha=0.25, gamma=0.25, **kw):
    return ProblemSpec(UNIT, K, M, alpha, gamma, **kw)


def _c_oracle(g, p, L):
    g, p, L = mpmath.mpf(g), mpmath.mpf(p), mpmath.mpf(L)
    pc = p / (p - 1)
    return float(g**g / (g + 1) ** (g + 1) * (1 - g * pc) ** (1 / pc) / L ** (g + 1 / pc))


@pytest.mark.parametrize("g, p, L", [(0.25, 2, 1), (0.25, 2, 2), (0.1, 4, 1), (0.6, 10, 3)])
def test_c_gamma_against_mpmath(g, p, L):
    assert c_gamma_const(g, p, Domain1D(0, L)) == pytest.approx(_c_oracle(g, p, L), rel=1e-13)


def test_c_gamma_frozen_values():
    assert c_gamma_const(0.25, 2, UNIT) == pytest.approx(0.37829664360, abs=1e-10)
    assert c_gamma_const(0.25, 2, Domain1D(0, 2)) == pytest.approx(0.22493653, abs=1e-8)
    # p = inf: p' = 1
    assert c_gamma_const(0.5, math.inf, UNIT) == pytest.approx(0.5**0.5 / 1.5**1.5 * 0.5)


def test_c_gamma_range():
    with pytest.raises(HypothesisViolation):
        c_gamma_const(0.5, 2, UNIT)
    with pytest.raises(HypothesisViolation):
        c_gamma_const(0.0, 2, UNIT)


def test_m2_worked_example():
    r = suff_m2(prob())
    # ||0.1 x||_2 on (0,1) = 0.1/sqrt(3); rhs = c (1/4)^(5/4) / 1^(1/4)
    lhs = 0.1 / math.sqrt(3)
    rhs = _c_oracle(0.25, 2, 1) * 0.25**1.25
    assert r.holds and not r.strict
    assert r.lhs == pytest.approx(lhs, rel=1e-12)
    assert r.rhs == pytest.approx(rhs, rel=1e-12)
    assert r.margin == pytest.approx(rhs - lhs, rel=1e-10)
    assert r.constants["tau"] == pytest.approx(2.0)


def test_m2_zero_M_holds_and_large_M_fails():
    assert suff_m2(prob(M=FunctionSpec.constant(0))).holds
    assert not suff_m2(prob(M=FunctionSpec.constant(1))).holds


def test_m2_requires_equal_exponents():
    with pytest.raises(HypothesisViolation):
        suff_m2(prob(alpha=0.3))


@pytest.mark.parametrize("c, holds", [(0.4, True), (0.5, False), (0.6, False)])
def test_hip(c, holds):
    r = suff_hip(prob(M=FunctionSpec.constant(c)))
    assert r.strict and r.holds is holds
    assert r.lhs == pytest.approx(c / 2, rel=1e-13)
    assert r.rhs == pytest.approx(0.25, rel=1e-13)


def test_moments_constant():
    grid = build_grid(UNIT, 100)
    from sdlab.grid import sample
    m = moments(sample(ONE, grid), sample(FunctionSpec.constant(2), grid))
    assert m["int_K"] == pytest.approx(1) and m["int_K_delta"] == pytest.approx(0.25)
    assert m["int_M_a"] == pytest.approx(1) and m["int_M_b"] == pytest.approx(1)


def test_endpoint_norm_power():
    grid = build_grid(UNIT, 200)
    from sdlab.grid import sample
    M = sample(FunctionSpec.power(0, 0, 1.0), grid)
    assert endpoint_weighted_norm(M, 2) == pytest.approx(1 / math.sqrt(3), rel=1e-12)
    assert endpoint_weighted_norm(M, math.inf) == pytest.approx(1.0, abs=1e-3)


def _algo_oracle(center, width, height, K=1.0):
    def m(t):
        z = (t - center) / width
        return height * math.cos(0.5 * math.pi * z) ** 2 if abs(z) < 1 else 0.0

    pts = [center - width, center, center + width]
    int_m_delta = sint.quad(lambda t: m(t) * min(t, 1 - t), 0, 1, points=pts)[0]
    int_m_a = sint.quad(lambda t: m(t) * t, 0, 1, points=pts)[0]
    int_m_b = sint.quad(lambda t: m(t) * (1 - t), 0, 1, points=pts)[0]
    dist = min(center - width, 1 - center - width)
    gap = K / 4 - max(int_m_a, int_m_b)
    top = 0.5 * (K / 2 - int_m_delta)
    return dist, gap, top


def test_algo_lower_bound_bump():
    dist, gap, top = _algo_oracle(0.5, 0.1, 1.0)
    r = lambda0_lower_algo_report(prob(M=FunctionSpec.bump(0.5, 0.1, 1.0), alpha=1, gamma=1))
    # alpha = gamma = 1: exponent alpha (1+gamma)/(1+alpha) = 1
    # the bump edges are kinks off the mesh, so agreement is at the sampling level
    assert r.rhs == pytest.approx(dist * gap / top, rel=1e-6)
    assert r.rhs == pytest.approx(0.353221, abs=1e-6)
    assert r.constants["dist_support"] == pytest.approx(0.4)


def test_algo_lower_bound_general_exponents():
    dist, gap, top = _algo_oracle(0.3, 0.1, 0.5)
    a, g = 0.5, 2.0
    expected = dist**g * gap**g / top ** (a * (1 + g) / (1 + a))
    got = lambda0_lower_algo(prob(M=FunctionSpec.bump(0.3, 0.1, 0.5), alpha=a, gamma=g))
    assert got == pytest.approx(expected, rel=1e-6)


def test_algo_lower_bound_errors_and_degenerate():
    with pytest.raises(SupportError):
        lambda0_lower_algo(prob())
    with pytest.raises(HypothesisViolation):
        lambda0_lower_algo(prob(M=FunctionSpec.bump(0.5, 0.2, 20.0)))
    r = lambda0_lower_algo_report(prob(M=FunctionSpec.constant(0)))
    assert math.isinf(r.rhs) and r.constants["degenerate"]


def test_necessary_upper():
    assert lambda_necessary_upper(prob(M=ONE, alpha=1, gamma=1)) == pytest.approx(1.0, rel=1e-12)
    # (alpha+1)/2 * max(int K_a, int K_b) = 1/2, exponent 1/2, ratio 1
    got = lambda_necessary_upper(prob(M=ONE, alpha=1, gamma=2))
    assert got == pytest.approx(math.sqrt(0.5), rel=1e-12)
    r = lambda_necessary_upper_report(prob(M=ONE, alpha=1, gamma=1, lam=2.0))
    assert not r.holds
    assert math.isinf(lambda_necessary_upper(prob(M=FunctionSpec.constant(0))))
    with pytest.raises(HypothesisViolation):
        lambda_necessary_upper(prob(alpha=2, gamma=1))


def test_support_distance():
    grid = build_grid(UNIT, 200)
    assert support_distance(FunctionSpec.bump(0.3, 0.1, 1), grid) == pytest.approx(0.2)
    assert support_distance(ONE, grid) == 0
    assert math.isinf(support_distance(FunctionSpec.constant(0), grid))
    assert support_distance(FunctionSpec.table([0, 0.25, 0.5, 0.75, 1], [0, 0, 1, 0, 0]), grid) == \
        pytest.approx(0.25)


def test_sign_changing_dominant_positive():
    m = FunctionSpec.sinesign(2.0, 0.5)
    r1, r2, nec = certify_sign_changing(m, 0.1, 2.0, UNIT)
    assert [r.certificate_id for r in (r1, r2, nec)] == ["SIGN_CHANGING_I", "SIGN_CHANGING_II",
                                                        "SIGN_CHANGING_NEC"]
    assert r2.holds and nec.holds and not r1.holds
    assert not certify_sign_changing(m.scaled(-1), 0.1, 2.0, UNIT)[2].holds


def test_sign_changing_necessary_against_quad():
    m = FunctionSpec.sinesign(1.0, 0.2)
    nec = certify_sign_changing(m, 0.1, 2.0, UNIT)[2]
    f = lambda t: 0.2 + math.sin(2 * math.pi * t)
    plus = sint.quad(lambda t: max(f(t), 0) * min(t, 1 - t), 0, 1, limit=200)[0]
    minus = sint.quad(lambda t: max(-f(t), 0) * min(t, 1 - t), 0, 1, limit=200)[0]
    # m+ and m- have kinks at the sign changes, off the mesh
    assert nec.lhs == pytest.approx(minus, rel=1e-5)
    assert nec.rhs == pytest.approx(plus, rel=1e-5)
    assert nec.holds


def test_sign_changing_negative_only():
    reports = certify_sign_changing(FunctionSpec.constant(-1.0), 0.1, 2.0, UNIT)
    assert not any(r.holds for r in reports)
    with pytest.raises(SDLError):
        certify_sign_changing(FunctionSpec.constant(0.0), 0.1, 2.0, UNIT)


def test_certify_collects_reports():
    ids = [r.certificate_id for r in certify(prob())]
    assert ids == ["M2", "HIP", "ALGO_LOWER", "NECESSARY_UPPER"]
    assert "not applicable" in certify(prob())[2].notes
    ids = [r.certificate_id for r in certify(prob(alpha=2, gamma=1))]
    assert ids == ["HIP", "ALGO_LOWER"]


def test_problem_spec_validation():
    with pytest.raises(SDLError):
        prob(alpha=-1)
    with pytest.raises(SDLError):
        prob(p=1.5)
    with pytest.raises(SDLError, match="nonnegative"):
        prob(M=FunctionSpec.sinesign(1, 0)).sampled()
    with pytest.raises(SDLError, match="vanish"):
        prob(K=FunctionSpec.constant(0)).sampled()
    with pytest.raises(SDLError):
        suff_m2(ProblemSpec(BallDomain(1, 2), ONE, ONE, 0.2, 0.2))


def test_report_serialisation():
    d = suff_m2(prob()).to_dict()
    assert list(d["constants"]) == sorted(d["constants"])
    assert d["certificate_id"] == "M2" and d["holds"] is True


@seed(SEED)
@given(c=st.floats(0.01, 100), s=st.integers(0, 10**6))
def test_certificates_scale_invariant(c, s):
    # scaling K and M by the same c scales both sides of M2 and HIP by c
    rng = np.random.default_rng(s)
    K, M = random_nonnegative(rng), random_nonnegative(rng).scaled(0.05)
    base = prob(K=K, M=M, n=100)
    scaled = prob(K=K.scaled(c), M=M.scaled(c), n=100)
    for f in (suff_m2, suff_hip):
        r0, r1 = f(base), f(scaled)
        assert r1.lhs == pytest.approx(c * r0.lhs, rel=1e-10)
        assert r1.rhs == pytest.approx(c * r0.rhs, rel=1e-10)
        assert r1.holds == r0.holds or abs(r0.margin) < 1e-9 * abs(r0.rhs)


@seed(SEED)
@given(s=st.integers(0, 10**6), g=st.floats(0.02, 0.49))
def test_m2_implies_hip_property(s, g):
    rng = np.random.default_rng(s)
    K, M = random_nonnegative(rng), random_nonnegative(rng).scaled(10 ** rng.uniform(-3, 0))
    p = prob(K=K, M=M, alpha=g, gamma=g, n=100)
    if suff_m2(p).holds:
        assert suff_hip(p).holds


def test_grid_convergence_of_certificate_sides():
    M = FunctionSpec.bump(0.4, 0.2, 0.5)
    coarse, fine = suff_m2(prob(M=M, n=200)), suff_m2(prob(M=M, n=400))
    assert fine.lhs == pytest.approx(coarse.lhs, rel=1e-6)
    assert fine.rhs == pytest.approx(coarse.rhs, rel=1e-10)
