import os

import numpy as np
import pytest
from hypothesis import settings

from sdlab.grid import FunctionSpec

SEED = int(os.environ.get("SDL_SEED", "20240611"))

settings.register_profile("sdl", deadline=None, max_examples=40, derandomize=False)
settings.load_profile("sdl")


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def random_nonnegative(rng, a=0.0, b=1.0):
    """A random nonnegative, not identically zero catalogue function on [a, b]."""
    L = b - a
    kind = rng.choice(["constant", "power", "bump", "table"])
    if kind == "constant":
        return FunctionSpec.constant(rng.uniform(0.1, 3.0))
    if kind == "power":
        return FunctionSpec.power(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0.1, 3.0) / L)
    if kind == "bump":
        w = rng.uniform(0.05, 0.4) * L
        c = rng.uniform(a + 0.1 * L, b - 0.1 * L)
        return FunctionSpec.bump(c, w, rng.uniform(0.1, 5.0))
    xs = np.linspace(a, b, 6)
    vals = rng.uniform(0, 2, 6)
    vals[rng.integers(6)] += 0.5
    return FunctionSpec.table(xs, vals)


class CallableFunction(FunctionSpec):
    """Wrap an arbitrary vectorised f(x) so it can stand in for K or M."""

    def __init__(self, f, tag):
        object.__setattr__(self, "kind", "constant")
        object.__setattr__(self, "params", (("c", 0.0),))
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "tag", tag)

    def __call__(self, x, domain):
        return self.f(np.asarray(x, dtype=float))

    def declared_support(self, domain):
        return None

    def to_dict(self):
        return {"kind": "callable", "tag": self.tag}

    def __hash__(self):
        return hash(self.tag)

    def __eq__(self, other):
        return self is other


def sine_instance(g=0.5):
    """K, M with exact solution sin(pi x) for alpha = gamma = g, lambda = 1."""
    def s(x):
        return np.maximum(np.sin(np.pi * x), 0.0)

    K = CallableFunction(lambda x: (np.pi**2 * s(x) + 0.5) * s(x) ** g, f"sineK{g}")
    M = CallableFunction(lambda x: 0.5 * s(x) ** g, f"sineM{g}")
    return K, M, s
