"""Exceptions and small argument-checking helpers shared by every module."""

import math

import numpy as np


class SDLError(ValueError):
    """Base class for every error raised by sdlab."""


class HypothesisViolation(SDLError):
    """A certificate or constructive step was asked for outside its hypotheses."""


class SupportError(SDLError):
    """The support of a coefficient touches the boundary where it must not."""


class ConfigError(SDLError):
    """A run configuration failed validation.

    ``violations`` lists every problem found, not only the first one.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def check_positive(value, name, allow_inf=False):
    value = float(value)
    if math.isnan(value) or value <= 0 or (math.isinf(value) and not allow_inf):
        raise SDLError(f"{name} must be a positive real, got {value!r}")
    return value


def check_exponent_p(p):
    """Integrability exponent: a real >= 2 or infinity."""
    p = float(p)
    if math.isnan(p) or p < 2:
        raise SDLError(f"p must be >= 2 (or inf), got {p!r}")
    return p


def conjugate(p):
    """Hoelder conjugate, with p' = 1 when p is infinite."""
    p = float(p)
    if math.isinf(p):
        return 1.0
    if p <= 1:
        raise SDLError(f"conjugate exponent undefined for p={p}")
    return p / (p - 1.0)


def check_nonnegative_values(values, name, atol=0.0):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise SDLError(f"{name} has non-finite values")
    if np.any(values < -atol):
        raise SDLError(f"{name} must be nonnegative (min value {values.min():.3e})")
    return values
