"""Normal-mixture superpopulations and their densities on the unit interval.

Components are written ``(weight, mean, variance)``; ``N(-1, 0.5)`` means a
normal with variance 0.5. Pass ``scale="sd"`` to read the third entry as a
standard deviation instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .basis import ScalingTransform


@dataclass(frozen=True)
class Superpopulation:
    weights: tuple
    means: tuple
    variances: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        m = tuple(float(v) for v in self.means)
        v = tuple(float(x) for x in self.variances)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "variances", v)
        if not (len(w) == len(m) == len(v) >= 1):
            raise ValueError("components need matching weights, means and variances")
        if any(p <= 0 or p > 1 for p in w) or abs(math.fsum(w) - 1.0) > 1e-9:
            raise ValueError("component weights must lie in (0, 1] and sum to 1")
        if any(x <= 0 for x in v):
            raise ValueError("component variances must be positive")

    @classmethod
    def from_components(cls, components: Sequence[Sequence[float]], scale: str = "variance"):
        """Build from ``[(weight, mean, variance), ...]`` triples."""
        if scale not in ("variance", "sd"):
            raise ValueError("scale must be 'variance' or 'sd'")
        w, m, v = zip(*components)
        if scale == "sd":
            v = tuple(float(s) ** 2 for s in v)
        return cls(w, m, v)

    def to_components(self) -> list:
        return [list(c) for c in zip(self.weights, self.means, self.variances)]

    @property
    def sds(self) -> np.ndarray:
        return np.sqrt(self.variances)

    def mean(self) -> float:
        return float(np.dot(self.weights, self.means))

    def variance(self) -> float:
        w, mu, var = map(np.asarray, (self.weights, self.means, self.variances))
        return float(np.dot(w, var + mu**2) - np.dot(w, mu) ** 2)

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for p, mu, sd in zip(self.weights, self.means, self.sds):
            out = out + p * stats.norm.pdf(x, mu, sd)
        return out

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for p, mu, sd in zip(self.weights, self.means, self.sds):
            out = out + p * stats.norm.cdf(x, mu, sd)
        return out

    def mass(self, a: float, b: float) -> float:
        return float(self.cdf(b) - self.cdf(a))


def sample_population(sp: Superpopulation, N: int, rng: np.random.Generator) -> np.ndarray:
    """``N`` i.i.d. draws: pick a component, then draw from that normal."""
    if N < 1:
        raise ValueError("population size must be positive")
    comp = rng.choice(len(sp.weights), size=N, p=sp.weights)
    return rng.normal(np.asarray(sp.means)[comp], sp.sds[comp])


def true_density_on_unit(sp: Superpopulation, t: ScalingTransform, u) -> np.ndarray:
    """Density of the scaled variable: ``(b - a) f(a + (b - a) u)``."""
    return t.width * sp.pdf(t.inverse(u))


# Superpopulations used in the simulation study.
STANDARD_NORMAL = Superpopulation((1.0,), (0.0,), (1.0,))
TWO_COMPONENT = Superpopulation((0.4, 0.6), (-1.0, 1.0), (0.5, 1.0))
THREE_COMPONENT = Superpopulation((0.3, 0.4, 0.3), (-1.0, 0.0, 1.0), (0.15, 0.15, 0.15))

NAMED = {
    "normal": STANDARD_NORMAL,
    "mixture2": TWO_COMPONENT,
    "mixture3": THREE_COMPONENT,
}
