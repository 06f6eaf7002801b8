"""Exact solution operator of -phi'' = h, phi(a) = phi(b) = 0, and the sharp
delta-comparison coefficients of its output for nonnegative h."""

from dataclasses import dataclass

import numpy as np

from .grid import GradedGrid, GridFn, integrate
from .validation import SDLError


@dataclass(frozen=True)
class ConeCoefficients:
    c_lower: float
    c_upper: float
    measured_inf_ratio: float
    measured_sup_ratio: float


def solve_poisson_1d(h):
    """phi = S(h) through the Green kernel.

    With A(x) = int_a^x (t-a) h and B(x) = int_x^b (b-t) h,

        phi(x)  = ((b-x) A(x) + (x-a) B(x)) / (b-a)
        phi'(x) = (B(x) - A(x)) / (b-a)

    which is the double-integral formula rearranged so that both terms are
    nonnegative for h >= 0.  Valid for sign-changing h as well.
    """
    grid = h.grid
    if not isinstance(grid, GradedGrid):
        raise SDLError("solve_poisson_1d needs an interval grid; use solve_poisson_radial on balls")
    a, b = grid.domain.a, grid.domain.b
    L = b - a
    A_n, A_x = grid.cumulative((grid.x - a) * h.values)
    B_n, B_x = grid.cumulative_right((b - grid.x) * h.values)
    x, xn = grid.x, grid.nodes
    phi_x = ((b - x) * A_x + (x - a) * B_x) / L
    phi_n = ((b - xn) * A_n + (xn - a) * B_n) / L
    phi_n[0] = phi_n[-1] = 0.0
    return GridFn(grid, phi_x, phi_n, (B_x - A_x) / L)


def boundary_slopes(h):
    """(phi'(a), phi'(b)) for phi = S(h)."""
    L = h.grid.domain.length
    return integrate(h, "right") / L, -integrate(h, "left") / L


def cone_coefficients(h):
    """Analytic and measured constants of c_lower*delta <= S(h) <= c_upper*delta."""
    if np.any(h.values < 0):
        raise SDLError("cone coefficients need a nonnegative function")
    if not np.any(h.values > 0):
        raise SDLError("cone coefficients need a function that is not identically zero")
    grid = h.grid
    L = grid.domain.length
    c_lower = integrate(h, "delta") / L
    c_upper = max(integrate(h, "left"), integrate(h, "right")) / L

    phi = solve_poisson_1d(h)
    ratio_x = phi.values / grid.delta
    inner = slice(1, -1)
    ratio_n = phi.node_values[inner] / grid.node_delta[inner]
    measured_inf = float(min(ratio_x.min(), ratio_n.min()))
    # phi/delta is 0/0 at the ends; the sup is the boundary slope there
    ends = (phi.node_values[1] / grid.node_delta[1], phi.node_values[-2] / grid.node_delta[-2])
    measured_sup = float(max(ratio_x.max(), ratio_n.max(), *ends))
    return ConeCoefficients(c_lower, c_upper, measured_inf, measured_sup)
