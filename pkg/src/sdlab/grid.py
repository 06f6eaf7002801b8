"""Domains, graded meshes, sampled functions and quadrature.

Every function lives on the Gauss-Legendre abscissae of a cell mesh.  Cell
integrals of a sampled function use the local interpolating polynomial, which
is also what makes the partial (cumulative) integrals and the exact
integration of the singular weight ``delta**beta`` in the endpoint cells
possible.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gamma as gamma_fn

from .validation import SDLError, check_nonnegative_values

DEFAULT_N = 400
DEFAULT_ORDER = 4
MAX_GRADING = 6.0
MIN_FIRST_CELL = 1e-12


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Domain1D:
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.a < self.b:
            raise SDLError(f"interval needs finite a < b, got ({self.a}, {self.b})")

    @property
    def length(self):
        return self.b - self.a

    @property
    def midpoint(self):
        return 0.5 * (self.a + self.b)

    @property
    def diameter(self):
        return self.length

    def delta(self, x):
        x = np.asarray(x, dtype=float)
        return np.minimum(x - self.a, self.b - x)

    def to_dict(self):
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class BallDomain:
    """Ball B_R in R^N; functions on it are radial and sampled on [0, R]."""

    R: float = 1.0
    N: int = 2
    omega: float = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0):
            raise SDLError(f"ball radius must be positive, got {self.R}")
        if int(self.N) != self.N or self.N < 2:
            raise SDLError(f"ball dimension must be an integer >= 2, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "omega", 2.0 * math.pi ** (self.N / 2) / gamma_fn(self.N / 2))

    # radial functions are evaluated as functions of r on (0, R)
    @property
    def a(self):
        return 0.0

    @property
    def b(self):
        return self.R

    @property
    def diameter(self):
        return 2.0 * self.R

    @property
    def volume(self):
        return self.omega * self.R**self.N / self.N

    def delta(self, r):
        return self.R - np.asarray(r, dtype=float)

    def to_dict(self):
        return {"ball": {"R": self.R, "N": self.N}}


# ---------------------------------------------------------------------------
# local quadrature data


@lru_cache(maxsize=None)
def _local_rule(order):
    """Gauss-Legendre rule on [0, 1] plus the partial integration matrix.

    ``partial[j, k]`` is the integral over [0, s_j] of the k-th Lagrange basis
    polynomial through the abscissae.
    """
    t, wt = np.polynomial.legendre.leggauss(order)
    s = 0.5 * (t + 1.0)
    w = 0.5 * wt
    vinv = np.linalg.inv(np.vander(s, order, increasing=True))  # rows: monomial m, cols: basis k
    powers = np.arange(1, order + 1)
    partial = (s[:, None] ** powers[None, :] / powers[None, :]) @ vinv
    return s, w, partial, vinv


def _power_moments(order, rho, beta):
    """mu_m = int_0^1 s^m (rho + s)^beta ds for m < order (beta > -1)."""
    mu = np.empty(order)
    if rho == 0.0:
        for m in range(order):
            mu[m] = 1.0 / (m + 1 + beta)
        return mu
    for m in range(order):
        acc = 0.0
        for j in range(m + 1):
            e = j + beta + 1.0
            acc += math.comb(m, j) * (-rho) ** (m - j) * ((rho + 1.0) ** e - rho**e) / e
        mu[m] = acc
    return mu


def auto_grading(exponent=0.0, n=None):
    """Default grading for a mesh that must resolve ``delta**(-exponent)``.

    With ``n`` given the grading is also capped so that the first cell keeps
    a relative width of at least MIN_FIRST_CELL.
    """
    if exponent <= 0:
        return 2.0
    if exponent < 1:
        k = min(MAX_GRADING, max(2.0, 2.0 / (1.0 - exponent)))
        if n is not None and n > 2:
            # first cell / L = (2/n)^k / 2
            k = max(2.0, min(k, math.log(0.5 / MIN_FIRST_CELL) / math.log(n / 2.0)))
        return k
    # the solution itself is then only Holder near the ends; heavier grading
    # leaves cells too small for the hat residual to settle
    return 2.0


# ---------------------------------------------------------------------------
# meshes


class _CellGrid:
    """Shared cell/abscissa machinery; subclasses fix nodes, delta and measure."""

    singular_left = True
    singular_right = True

    def _setup(self, nodes, order):
        nodes = np.asarray(nodes, dtype=float)
        if np.any(np.diff(nodes) <= 0):
            raise SDLError("grid nodes must be strictly increasing")
        self.nodes = nodes
        self.order = int(order)
        self.h = np.diff(nodes)
        s, w, _, _ = _local_rule(self.order)
        self.x = (nodes[:-1, None] + self.h[:, None] * s[None, :]).ravel()
        self.w = (self.h[:, None] * w[None, :]).ravel()
        self.n_cells = len(self.h)

    @property
    def size(self):
        return self.x.size

    def cells(self, values):
        return np.asarray(values, dtype=float).reshape(self.n_cells, self.order)

    def cumulative(self, g):
        """Integral of g from the left end, at nodes and at abscissae."""
        _, w, partial, _ = _local_rule(self.order)
        gc = self.cells(g)
        totals = (gc @ w) * self.h
        at_nodes = np.concatenate([[0.0], np.cumsum(totals)])
        at_x = at_nodes[:-1, None] + self.h[:, None] * (gc @ partial.T)
        return at_nodes, at_x.ravel()

    def cumulative_right(self, g):
        """Integral of g up to the right end, at nodes and at abscissae."""
        _, w, partial, _ = _local_rule(self.order)
        gc = self.cells(g)
        totals = (gc @ w) * self.h
        at_nodes = np.concatenate([np.cumsum(totals[::-1])[::-1], [0.0]])
        rest = w[None, :] - partial  # integral of each basis over [s_j, 1]
        at_x = at_nodes[1:, None] + self.h[:, None] * (gc @ rest.T)
        return at_nodes, at_x.ravel()

    @property
    def measure(self):
        return np.ones_like(self.x)

    @property
    def node_measure(self):
        return np.ones_like(self.nodes)

    @property
    def delta(self):
        return self.domain.delta(self.x)

    @property
    def node_delta(self):
        return self.domain.delta(self.nodes)

    @lru_cache(maxsize=16)
    def singular_weights(self, beta):
        """Weights W with sum(W * f) ~ int f delta^beta dt (no measure factor).

        Cells within two widths of a singular end integrate the weight exactly
        against the cubic (order-1) interpolant of f; elsewhere the weight is
        smooth and plain Gauss-Legendre is used.
        """
        beta = float(beta)
        if beta <= -1:
            raise SDLError(f"delta^{beta} is not integrable")
        s, _, _, _ = _local_rule(self.order)
        W = self.w * np.power(np.maximum(self.delta, 0.0), beta, where=self.delta > 0,
                              out=np.zeros_like(self.x))
        W = W.reshape(self.n_cells, self.order)
        a, b = self.domain.a, self.domain.b
        if self.singular_left:
            for i in range(self.n_cells):
                rho = (self.nodes[i] - a) / self.h[i]
                if rho > 2 or self.nodes[i] >= 0.5 * (a + b) - 1e-15 * abs(b - a):
                    break
                W[i] = self._moment_weights(s, rho, beta) * self.h[i] ** (1 + beta)
        if self.singular_right:
            for i in range(self.n_cells - 1, -1, -1):
                rho = (b - self.nodes[i + 1]) / self.h[i]
                if rho > 2 or self.nodes[i + 1] <= 0.5 * (a + b) + 1e-15 * abs(b - a):
                    break
                W[i] = self._moment_weights(1.0 - s, rho, beta) * self.h[i] ** (1 + beta)
        W = W.ravel()
        W.flags.writeable = False
        return W

    def _moment_weights(self, local_nodes, rho, beta):
        vinv = np.linalg.inv(np.vander(local_nodes, self.order, increasing=True))
        return _power_moments(self.order, rho, beta) @ vinv


class GradedGrid(_CellGrid):
    """Power-graded mesh on an interval, symmetric about the midpoint.

    With xi = i/n the nodes are ``a + L * g(xi)`` where
    ``g(xi) = 2**(k-1) xi**k`` on [0, 1/2] (k the grading) and mirrored on
    [1/2, 1].  The first cell therefore has width ``L * 2**(k-1) / n**k``.
    """

    def __init__(self, domain, n=DEFAULT_N, grading=2.0, order=DEFAULT_ORDER):
        if int(n) != n or n < 8:
            raise SDLError(f"need at least 8 cells, got n={n}")
        if not grading >= 1:
            raise SDLError(f"grading must be >= 1, got {grading}")
        self.domain = domain
        self.n = int(n)
        self.grading = float(grading)
        xi = np.arange(self.n + 1) / self.n
        k = self.grading
        g = np.where(xi <= 0.5, 2 ** (k - 1) * xi**k, 1.0 - 2 ** (k - 1) * (1.0 - xi) ** k)
        nodes = domain.a + domain.length * g
        nodes[0], nodes[-1] = domain.a, domain.b
        if self.n % 2 == 0:
            nodes[self.n // 2] = domain.midpoint
        self._setup(nodes, order)

    def refine(self, factor=2):
        return GradedGrid(self.domain, self.n * factor, self.grading, self.order)

    def __repr__(self):
        return f"GradedGrid({self.domain.a}, {self.domain.b}, n={self.n}, grading={self.grading})"


class RadialGrid(_CellGrid):
    """Mesh on [0, R] graded toward r = R only (r = 0 is the regular centre)."""

    singular_left = False

    def __init__(self, ball, n=DEFAULT_N, grading=2.0, order=DEFAULT_ORDER):
        if int(n) != n or n < 8:
            raise SDLError(f"need at least 8 cells, got n={n}")
        if not grading >= 1:
            raise SDLError(f"grading must be >= 1, got {grading}")
        self.domain = ball
        self.n = int(n)
        self.grading = float(grading)
        xi = np.arange(self.n + 1) / self.n
        nodes = ball.R * (1.0 - (1.0 - xi) ** self.grading)
        nodes[0], nodes[-1] = 0.0, ball.R
        self._setup(nodes, order)

    @property
    def measure(self):
        return self.domain.omega * self.x ** (self.domain.N - 1)

    def cumulative_rpow(self, g, power):
        """int_0^x t^power g(t) dt at nodes and abscissae.

        The weight t^power is integrated exactly against the interpolant of g,
        which keeps the relative accuracy near r = 0 where the plain product
        rule loses digits.
        """
        s, _, _, vinv = _local_rule(self.order)
        q = self.order
        gc = self.cells(g)
        coef = gc @ vinv.T  # monomial coefficients of the local interpolant, per cell
        j = np.arange(power + 1)
        binom = np.array([math.comb(power, k) for k in j], dtype=float)
        # int_0^e s^(k+m) ds for e in {s_1..s_q, 1}
        ends = np.concatenate([s, [1.0]])
        expo = j[:, None] + np.arange(q)[None, :] + 1.0  # (power+1, q)
        mono = ends[:, None, None] ** expo[None] / expo[None]  # (q+1, power+1, q)
        x0 = self.nodes[:-1]
        # t^power = sum_k binom_k x0^(power-k) h^k s^k
        scale = binom[None, :] * x0[:, None] ** (power - j)[None, :] * self.h[:, None] ** j[None, :]
        vals = np.einsum("ck,ekm,cm->ce", scale, mono, coef) * self.h[:, None]
        totals = vals[:, -1]
        at_nodes = np.concatenate([[0.0], np.cumsum(totals)])
        at_x = at_nodes[:-1, None] + vals[:, :-1]
        return at_nodes, at_x.ravel()

    @property
    def node_measure(self):
        return self.domain.omega * self.nodes ** (self.domain.N - 1)

    def refine(self, factor=2):
        return RadialGrid(self.domain, self.n * factor, self.grading, self.order)

    def singular_weights(self, beta):
        # the right-end sweep must not stop at the midpoint on [0, R]
        beta = float(beta)
        if beta <= -1:
            raise SDLError(f"delta^{beta} is not integrable")
        return _radial_singular_weights(self, beta)

    def __repr__(self):
        return f"RadialGrid(R={self.domain.R}, N={self.domain.N}, n={self.n}, grading={self.grading})"


def _radial_singular_weights(grid, beta):
    s, _, _, _ = _local_rule(grid.order)
    W = (grid.w * grid.delta**beta).reshape(grid.n_cells, grid.order)
    R = grid.domain.R
    for i in range(grid.n_cells - 1, -1, -1):
        rho = (R - grid.nodes[i + 1]) / grid.h[i]
        if rho > 2:
            break
        W[i] = grid._moment_weights(1.0 - s, rho, beta) * grid.h[i] ** (1 + beta)
    return W.ravel()


def build_grid(domain, n=DEFAULT_N, grading=None, order=DEFAULT_ORDER):
    """Graded mesh for an interval or a ball; ``grading=None`` means 2."""
    if grading is None:
        grading = auto_grading(0.0)
    if isinstance(domain, BallDomain):
        return RadialGrid(domain, n, grading, order)
    if isinstance(domain, Domain1D):
        return GradedGrid(domain, n, grading, order)
    raise SDLError(f"unsupported domain {domain!r}; only intervals and balls are supported")


# ---------------------------------------------------------------------------
# sampled functions


class GridFn:
    """Values at the abscissae of a grid, optionally with node values and
    derivative values at the abscissae (both produced by the Green operators).
    """

    def __init__(self, grid, values, node_values=None, deriv=None):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.x.shape:
            raise SDLError(f"expected {grid.x.size} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise SDLError("GridFn values must be finite")
        self.grid = grid
        self.values = values
        self.node_values = None if node_values is None else np.asarray(node_values, dtype=float)
        self.deriv = None if deriv is None else np.asarray(deriv, dtype=float)

    @property
    def x(self):
        return self.grid.x

    def _combine(self, other, op):
        if isinstance(other, GridFn):
            if other.grid is not self.grid:
                raise SDLError("GridFn arithmetic needs a shared grid")
            nv = None
            if self.node_values is not None and other.node_values is not None:
                nv = op(self.node_values, other.node_values)
            dv = None
            if self.deriv is not None and other.deriv is not None:
                dv = op(self.deriv, other.deriv)
            return GridFn(self.grid, op(self.values, other.values), nv, dv)
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, c):
        if isinstance(c, GridFn):
            out = GridFn(self.grid, self.values * c.values)
            if self.node_values is not None and c.node_values is not None:
                out.node_values = self.node_values * c.node_values
            return out
        c = float(c)
        return GridFn(
            self.grid,
            c * self.values,
            None if self.node_values is None else c * self.node_values,
            None if self.deriv is None else c * self.deriv,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def positive_part(self):
        return GridFn(self.grid, np.maximum(self.values, 0.0),
                      None if self.node_values is None else np.maximum(self.node_values, 0.0))

    def negative_part(self):
        return (-self).positive_part()

    def sup(self):
        vals = self.values if self.node_values is None else np.concatenate([self.values, self.node_values])
        return float(np.max(np.abs(vals)))

    def __repr__(self):
        return f"GridFn({self.grid!r}, sup={self.sup():.6g})"


# ---------------------------------------------------------------------------
# function catalogue

_KIND_ALIASES = {"const": "constant", "constant": "constant", "power": "power",
                 "bump": "bump", "sinesign": "sinesign", "table": "table"}
_REQUIRED = {
    "constant": ("c",),
    "power": ("s", "t"),
    "bump": ("center", "width", "height"),
    "sinesign": ("frequency", "offset"),
    "table": ("xs", "vals"),
}
_OPTIONAL = {"constant": {}, "power": {"c": 1.0}, "bump": {},
             "sinesign": {"amplitude": 1.0}, "table": {}}


@dataclass(frozen=True)
class FunctionSpec:
    """A catalogue function on an interval (or on [0, R] for radial data).

    kinds and parameters:

    * ``constant``: ``c``
    * ``power``: ``c (x-a)^s (b-x)^t`` with ``s, t > -1`` (``c`` defaults to 1)
    * ``bump``: ``height * cos^2(pi z / 2)`` for ``|z| < 1``, ``z = (x-center)/width``;
      its integral is ``height * width``
    * ``sinesign``: ``amplitude * sin(2 pi frequency (x-a)/(b-a)) + offset``
    * ``table``: piecewise-linear through ``(xs, vals)``, constant beyond the ends
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind)
        if kind is None:
            raise SDLError(f"unknown function kind {self.kind!r}; expected one of "
                           f"{sorted(set(_KIND_ALIASES.values()))}")
        object.__setattr__(self, "kind", kind)
        params = dict(self.params)
        if kind == "constant" and "c" not in params and "value" in params:
            params["c"] = params.pop("value")
        missing = [k for k in _REQUIRED[kind] if k not in params]
        if missing:
            raise SDLError(f"{kind} function is missing {missing}")
        unknown = set(params) - set(_REQUIRED[kind]) - set(_OPTIONAL[kind])
        if unknown:
            raise SDLError(f"{kind} function got unknown parameters {sorted(unknown)}")
        full = dict(_OPTIONAL[kind])
        full.update(params)
        if kind == "table":
            xs = tuple(float(v) for v in full["xs"])
            vals = tuple(float(v) for v in full["vals"])
            if len(xs) != len(vals) or len(xs) < 2:
                raise SDLError("table needs matching xs/vals with at least two points")
            if np.any(np.diff(xs) <= 0):
                raise SDLError("table xs must be strictly increasing")
            full["xs"], full["vals"] = xs, vals
        else:
            full = {k: float(v) for k, v in full.items()}
        if kind == "power" and (full["s"] <= -1 or full["t"] <= -1):
            raise SDLError("power exponents must exceed -1")
        if kind == "bump" and full["width"] <= 0:
            raise SDLError("bump width must be positive")
        object.__setattr__(self, "params", tuple(sorted(full.items())))

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if "kind" not in data:
            raise SDLError("function spec needs a 'kind'")
        kind = data.pop("kind")
        return cls(kind, tuple(data.items()))

    @classmethod
    def constant(cls, c):
        return cls("constant", (("c", c),))

    @classmethod
    def power(cls, s, t, c=1.0):
        return cls("power", (("s", s), ("t", t), ("c", c)))

    @classmethod
    def bump(cls, center, width, height):
        return cls("bump", (("center", center), ("width", width), ("height", height)))

    @classmethod
    def sinesign(cls, frequency, offset, amplitude=1.0):
        return cls("sinesign", (("frequency", frequency), ("offset", offset), ("amplitude", amplitude)))

    @classmethod
    def table(cls, xs, vals):
        return cls("table", (("xs", tuple(xs)), ("vals", tuple(vals))))

    @property
    def p(self):
        return dict(self.params)

    def to_dict(self):
        out = {"kind": self.kind}
        for k, v in self.params:
            out[k] = list(v) if isinstance(v, tuple) else v
        return out

    def scaled(self, c):
        """The function multiplied by the constant c."""
        p = self.p
        if self.kind == "constant":
            p["c"] *= c
        elif self.kind == "power":
            p["c"] *= c
        elif self.kind == "bump":
            p["height"] *= c
        elif self.kind == "sinesign":
            p["amplitude"] *= c
            p["offset"] *= c
        else:
            p["vals"] = tuple(c * v for v in p["vals"])
        return FunctionSpec(self.kind, tuple(p.items()))

    def __call__(self, x, domain):
        x = np.asarray(x, dtype=float)
        a, b = domain.a, domain.b
        p = self.p
        if self.kind == "constant":
            return np.full_like(x, p["c"])
        if self.kind == "power":
            with np.errstate(divide="ignore"):  # negative powers are inf at the ends
                return p["c"] * np.maximum(x - a, 0.0) ** p["s"] * np.maximum(b - x, 0.0) ** p["t"]
        if self.kind == "bump":
            z = (x - p["center"]) / p["width"]
            return np.where(np.abs(z) < 1, p["height"] * np.cos(0.5 * np.pi * z) ** 2, 0.0)
        if self.kind == "sinesign":
            return p["amplitude"] * np.sin(2 * np.pi * p["frequency"] * (x - a) / (b - a)) + p["offset"]
        xs, vals = np.asarray(p["xs"]), np.asarray(p["vals"])
        if xs[0] < a - 1e-12 or xs[-1] > b + 1e-12:
            raise SDLError(f"table abscissae [{xs[0]}, {xs[-1]}] leave the domain [{a}, {b}]")
        return np.interp(x, xs, vals)

    def declared_support(self, domain):
        """Closure of {f != 0} when the kind determines it, else None.

        Returns ``()`` for the zero function.
        """
        p = self.p
        a, b = domain.a, domain.b
        if self.kind == "constant":
            return () if p["c"] == 0 else (a, b)
        if self.kind == "power":
            return () if p["c"] == 0 else (a, b)
        if self.kind == "bump":
            if p["height"] == 0:
                return ()
            lo, hi = max(a, p["center"] - p["width"]), min(b, p["center"] + p["width"])
            return () if lo >= hi else (lo, hi)
        if self.kind == "table":
            xs, vals = p["xs"], p["vals"]
            nz = [i for i, v in enumerate(vals) if v != 0]
            if not nz:
                return ()
            i, j = nz[0], nz[-1]
            lo = xs[i - 1] if i > 0 else a
            hi = xs[j + 1] if j < len(xs) - 1 else b
            return (lo, hi)
        return None


def sample(f, grid):
    """Evaluate a FunctionSpec (or any vectorised callable of x) on a grid."""
    if isinstance(f, GridFn):
        return f
    if isinstance(f, FunctionSpec):
        return GridFn(grid, f(grid.x, grid.domain), f(grid.nodes, grid.domain))
    values = np.asarray(f(grid.x), dtype=float)
    return GridFn(grid, values, np.asarray(f(grid.nodes), dtype=float))


def sample_nonnegative(f, grid, name="function"):
    h = sample(f, grid)
    check_nonnegative_values(h.values, name)
    return h


# ---------------------------------------------------------------------------
# quadrature

WEIGHTS = ("one", "delta", "left", "right", "delta_pow")


def integrate(h, weight="one", exponent=None):
    """Integral of h over the domain against one of the standard weights.

    ``weight="delta_pow"`` integrates ``h * delta**exponent`` with the endpoint
    cells handled exactly; an exponent <= -1 is rejected unless h vanishes on
    the cells next to the singular end(s).  On a ball the volume measure
    ``omega r^(N-1) dr`` is included.
    """
    grid = h.grid
    dens = grid.measure
    if weight == "one":
        return float(np.sum(grid.w * dens * h.values))
    if weight == "delta":
        return float(np.sum(grid.w * dens * grid.delta * h.values))
    if weight == "left":
        return float(np.sum(grid.w * dens * (grid.x - grid.domain.a) * h.values))
    if weight == "right":
        return float(np.sum(grid.w * dens * (grid.domain.b - grid.x) * h.values))
    if weight == "delta_pow":
        if exponent is None:
            raise SDLError("delta_pow weight needs an exponent")
        exponent = float(exponent)
        if exponent <= -1:
            hc = grid.cells(h.values)
            ends = [hc[-1]] if not grid.singular_left else [hc[0], hc[-1]]
            if any(np.any(e != 0) for e in ends):
                raise SDLError(
                    f"delta^{exponent} is not integrable against a function that does not "
                    "vanish at the boundary")
            safe = np.where(h.values != 0, grid.delta, 1.0)
            return float(np.sum(grid.w * dens * h.values * safe**exponent))
        W = grid.singular_weights(exponent)
        return float(np.sum(W * dens * h.values))
    raise SDLError(f"unknown weight {weight!r}; expected one of {WEIGHTS}")


def lp_norm(h, p):
    """Quadrature L^p norm (p = inf gives the max over abscissae)."""
    p = float(p)
    if math.isnan(p) or p < 1:
        raise SDLError(f"L^p norm needs p >= 1, got {p}")
    if math.isinf(p):
        return float(np.max(np.abs(h.values)))
    grid = h.grid
    return float(np.sum(grid.w * grid.measure * np.abs(h.values) ** p) ** (1.0 / p))


def delta_negpow_norm_closed_form(domain, gamma, p_conj):
    """Exact L^{p'} norm of delta^(-gamma) on an interval."""
    gamma, p_conj = float(gamma), float(p_conj)
    if gamma * p_conj >= 1:
        raise SDLError(
            f"delta^(-{gamma}) is not in L^{p_conj}: gamma*p' = {gamma * p_conj} >= 1 "
            "(the hypothesis gamma < (p-1)/p fails)")
    L = domain.length
    return 2.0**gamma * L ** (1.0 / p_conj - gamma) / (1.0 - gamma * p_conj) ** (1.0 / p_conj)


def delta_negpow_norm(grid, gamma, p_conj):
    """Quadrature L^{p'} norm of delta^(-gamma) on the grid's domain."""
    ones = GridFn(grid, np.ones_like(grid.x))
    return integrate(ones, "delta_pow", -gamma * p_conj) ** (1.0 / p_conj)
