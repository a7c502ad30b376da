"""Closed-form rates for cosine-series estimators over Sobolev balls.

The Sobolev ball of order ``k`` and radius ``Q`` holds densities
``1 + sum theta_j phi_j`` with ``sum (pi j)^(2k) theta_j^2 <= Q``. ``b`` is the
per-coefficient variance constant: 2 under the combined design-model
approach, 1 for i.i.d. samples. ``c`` is the constant in the coefficient decay
``theta_j^2 = c j^(-2(k+1))``.

``H2`` carries the exponent ``-1/(2k+1)`` on its second factor, the same as
``H1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class SobolevParams:
    k: float = 1.0
    Q: float = 1.0
    b: float = 2.0
    c: float = 1.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("smoothness order k must be >= 1")
        for name in ("Q", "b", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def rate(self) -> float:
        """MISE exponent ``2k / (2k + 1)``."""
        return 2 * self.k / (2 * self.k + 1)


def pinsker_constant(p: SobolevParams) -> float:
    """``Q^(1/(2k+1)) * (k / (pi (k+1) b))^(2k/(2k+1))``."""
    k = p.k
    return p.Q ** (1 / (2 * k + 1)) * (k / (math.pi * (k + 1) * p.b)) ** (2 * k / (2 * k + 1))


def minimax_lower_bound(p: SobolevParams, N: int) -> float:
    """Leading term ``N^(-2k/(2k+1)) P(k, Q, b)`` of the minimax MISE lower bound."""
    if N < 1:
        raise ValueError("N must be positive")
    return N ** (-p.rate) * pinsker_constant(p)


def _decay_factor(p: SobolevParams) -> float:
    k = p.k
    return ((2 * k + 1) / ((2 * k + 2) * p.c)) ** (-1 / (2 * k + 1))


def H1(p: SobolevParams) -> float:
    return p.b ** (-1 / (2 * p.k + 1)) * _decay_factor(p)


def H2(p: SobolevParams) -> float:
    return p.b ** (2 * p.k / (2 * p.k + 1)) * _decay_factor(p)


def optimal_J_theory(p: SobolevParams, N: int) -> float:
    """Approximate MISE-optimal truncation ``N^(1/(2k+1)) H1``."""
    if N < 1:
        raise ValueError("N must be positive")
    return N ** (1 / (2 * p.k + 1)) * H1(p)


def mise_min_theory(p: SobolevParams, N: int) -> float:
    """Approximate minimal MISE of the truncated estimator, ``N^(-2k/(2k+1)) H2``."""
    if N < 1:
        raise ValueError("N must be positive")
    return N ** (-p.rate) * H2(p)


def theory_table(p: SobolevParams, sizes) -> list[dict]:
    """One row of theoretical quantities per population size."""
    return [
        {
            "N": int(N),
            "minimax_lower_bound": minimax_lower_bound(p, N),
            "optimal_J": optimal_J_theory(p, N),
            "mise_min": mise_min_theory(p, N),
        }
        for N in sizes
    ]
