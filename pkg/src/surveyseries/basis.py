"""Cosine basis on [0, 1] and the affine map that puts data there."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Slack allowed when checking that scaled values lie in [0, 1].
DOMAIN_TOL = 1e-12

SQRT2 = math.sqrt(2.0)


class DomainError(ValueError):
    """Raised when a point outside [0, 1] reaches the basis (usually unscaled data)."""


def check_unit(u, tol: float = DOMAIN_TOL) -> np.ndarray:
    """Return ``u`` as a float array clipped onto [0, 1], rejecting points beyond ``tol``."""
    u = np.asarray(u, dtype=float)
    if u.size and (np.any(~np.isfinite(u)) or u.min() < -tol or u.max() > 1.0 + tol):
        raise DomainError(
            f"values must lie in [0, 1]; got range [{u.min():.6g}, {u.max():.6g}] "
            "(was the data scaled?)"
        )
    return np.clip(u, 0.0, 1.0)


def phi(j: int, x):
    """Cosine basis function: 1 for ``j == 0``, otherwise sqrt(2) cos(pi j x).

    Accepts a scalar or an array for ``x``; returns the same shape.
    """
    if j < 0:
        raise ValueError("basis index must be nonnegative")
    u = check_unit(x)
    out = np.ones_like(u) if j == 0 else SQRT2 * np.cos(math.pi * j * u)
    return float(out) if out.ndim == 0 else out


def design_matrix(x, j_max: int) -> np.ndarray:
    """Matrix ``M[i, j] = phi_j(x_i)`` for ``j = 0..j_max``."""
    u = np.atleast_1d(check_unit(x))
    j = np.arange(j_max + 1)
    mat = SQRT2 * np.cos(math.pi * np.outer(u, j))
    mat[:, 0] = 1.0
    return mat


@dataclass(frozen=True)
class ScalingTransform:
    """Affine map of the data interval ``[a, b]`` onto ``[0, 1]``."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.b <= self.a:
            raise ValueError(f"scaling needs finite a < b, got a={self.a}, b={self.b}")

    @property
    def width(self) -> float:
        return self.b - self.a

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        out = (x - self.a) / (self.b - self.a)
        return float(out) if out.ndim == 0 else out

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        out = self.a + (self.b - self.a) * u
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b}


def fit_scaling(values, margin: float = 0.0) -> ScalingTransform:
    """Fit ``[min - m*range, max + m*range]`` to the data.

    Parameters
    ----------
    values : array_like
        Observations on the original scale.
    margin : float
        Fraction of the range added on each side. Use 0 when scaling a whole
        finite population and a small positive margin for samples, so that
        observations sit strictly inside the unit interval.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise ValueError("need at least two values to fit a scaling")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        raise ValueError("cannot fit a scaling: all values are equal")
    rng = hi - lo
    return ScalingTransform(lo - margin * rng, hi + margin * rng)
