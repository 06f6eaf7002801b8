import math

import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st
from scipy import integrate as sint

from conftest import SEED
from sdlab.greens import boundary_slopes, cone_coefficients, solve_poisson_1d
from sdlab.grid import Domain1D, FunctionSpec, GridFn, build_grid, sample
from sdlab.validation import SDLError

UNIT = Domain1D(0.0, 1.0)


def _green_oracle(f, x, a, b):
    """S(f)(x) by adaptive quadrature of the Green kernel."""
    L = b - a
    left = sint.quad(lambda t: (t - a) * (b - x) / L * f(t), a, x, limit=200)[0]
    right = sint.quad(lambda t: (x - a) * (b - t) / L * f(t), x, b, limit=200)[0]
    return left + right


def test_constant_source():
    grid = build_grid(UNIT, 400)
    phi = solve_poisson_1d(GridFn(grid, np.ones(grid.size)))
    assert np.max(np.abs(phi.values - grid.x * (1 - grid.x) / 2)) < 1e-14
    assert np.max(np.abs(phi.deriv - (0.5 - grid.x))) < 1e-14
    assert phi.node_values[0] == 0 and phi.node_values[-1] == 0


def test_sine_source():
    grid = build_grid(UNIT, 200)
    phi = solve_poisson_1d(sample(lambda x: np.sin(np.pi * x), grid))
    assert np.allclose(phi.values, np.sin(np.pi * grid.x) / np.pi**2, atol=1e-12)


@pytest.mark.parametrize("f, atol", [
    (lambda t: np.exp(-((t - 0.3) ** 2)), 1e-12),
    # the bump's edges are kinks off the mesh: sampling error, not operator error
    (lambda t: FunctionSpec.bump(0.3, 0.5, 2.0)(np.asarray(t), Domain1D(-1.0, 2.0)), 1e-6),
])
def test_shifted_interval_against_kernel_quadrature(f, atol):
    d = Domain1D(-1.0, 2.0)
    grid = build_grid(d, 200)
    phi = solve_poisson_1d(sample(f, grid))
    for x in (-0.7, 0.0, 0.3, 1.1, 1.9):
        i = np.argmin(np.abs(grid.nodes - x))
        oracle = _green_oracle(lambda t: float(f(np.array([t]))[0]), grid.nodes[i], d.a, d.b)
        assert phi.node_values[i] == pytest.approx(oracle, abs=atol)


def test_boundary_slopes():
    grid = build_grid(UNIT, 100)
    h = sample(lambda x: x, grid)
    # S(x) = (x - x^3)/6
    sa, sb = boundary_slopes(h)
    assert sa == pytest.approx(1 / 6, abs=1e-13)
    assert sb == pytest.approx(-1 / 3, abs=1e-13)


def test_cone_coefficients_constant():
    grid = build_grid(UNIT, 400)
    cc = cone_coefficients(sample(FunctionSpec.constant(1), grid))
    assert cc.c_lower == pytest.approx(0.25, abs=1e-14)
    assert cc.c_upper == pytest.approx(0.5, abs=1e-14)
    assert cc.measured_inf_ratio == pytest.approx(0.25, abs=1e-12)
    assert cc.measured_sup_ratio == pytest.approx(0.5, rel=1e-5)


def test_cone_coefficients_errors():
    grid = build_grid(UNIT, 50)
    with pytest.raises(SDLError, match="nonnegative"):
        cone_coefficients(sample(FunctionSpec.sinesign(1, 0), grid))
    with pytest.raises(SDLError, match="identically zero"):
        cone_coefficients(sample(FunctionSpec.constant(0), grid))


def test_rejects_radial_grid():
    from sdlab.grid import BallDomain
    grid = build_grid(BallDomain(1.0, 2), 50)
    with pytest.raises(SDLError):
        solve_poisson_1d(GridFn(grid, np.ones(grid.size)))


weights = st.lists(st.floats(0, 3), min_size=4, max_size=4)


def _mix(grid, w):
    x = grid.x
    return GridFn(grid, w[0] + w[1] * x**2 + w[2] * np.exp(-30 * (x - 0.3) ** 2) + w[3] * np.sqrt(x))


@seed(SEED)
@given(w=weights, v=weights, c=st.floats(-2, 2))
def test_linear(w, v, c):
    grid = build_grid(UNIT, 64)
    f, g = _mix(grid, w), _mix(grid, v)
    lhs = solve_poisson_1d(f + g * c).values
    rhs = solve_poisson_1d(f).values + c * solve_poisson_1d(g).values
    assert np.allclose(lhs, rhs, atol=1e-12)


@seed(SEED)
@given(w=weights, v=weights)
def test_positive_and_monotone(w, v):
    grid = build_grid(UNIT, 64)
    f, g = _mix(grid, w), _mix(grid, v)
    phi_f = solve_poisson_1d(f)
    assert np.all(phi_f.values >= -1e-15)
    # f <= f + g pointwise, so S(f) <= S(f + g)
    assert np.all(solve_poisson_1d(f + g).values >= phi_f.values - 1e-14)


@seed(SEED)
@given(w=weights)
def test_cone_sandwich(w):
    if sum(w) == 0:
        w = [1.0, 0, 0, 0]
    grid = build_grid(UNIT, 200)
    h = _mix(grid, w)
    cc = cone_coefficients(h)
    phi = solve_poisson_1d(h)
    assert np.all(phi.values >= cc.c_lower * grid.delta - 1e-12)
    assert np.all(phi.values <= cc.c_upper * grid.delta + 1e-12)
    assert cc.measured_inf_ratio == pytest.approx(cc.c_lower, rel=1e-9)
    assert cc.measured_sup_ratio == pytest.approx(cc.c_upper, rel=1e-4)


def test_discrete_maximum_principle_on_scaled_interval():
    # S scales like L^2: the interval (0, 2) gives four times S on (0, 1)
    g1, g2 = build_grid(UNIT, 64), build_grid(Domain1D(0.0, 2.0), 64)
    s1 = solve_poisson_1d(GridFn(g1, np.ones(g1.size)))
    s2 = solve_poisson_1d(GridFn(g2, np.ones(g2.size)))
    assert np.allclose(s2.values, 4 * s1.values, atol=1e-13)
    assert math.isclose(s2.sup(), 0.5, rel_tol=1e-3)
