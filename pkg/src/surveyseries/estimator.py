"""Horvitz-Thompson cosine-series density estimators.

The estimate on the unit interval is

    f_hat(u) = 1 + sum_{j=1}^{J} w_j theta_hat_j phi_j(u),
    theta_hat_j = N^-1 sum_{i in s} d_i phi_j(x_i).

Coefficients are computed once up to ``2 * J_cap`` so that every variance
constant ``b_hat_j`` (which reads ``theta_hat_{2j}``) is available without
going back to the data. Only the coefficients, weights and scaling are needed
to evaluate an estimate, which is what makes it publishable without the raw
observations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import SQRT2, ScalingTransform, check_unit, design_matrix
from .design import WeightedSample

INV_SQRT2 = 1.0 / SQRT2

METHODS = ("oracle", "truncated", "smoothed", "iid-baseline")


class ProjectionError(ValueError):
    pass


def j_cap(n: int) -> int:
    """Upper bound ``floor(4 + 0.5 ln n)`` for the truncation search."""
    if n < 1:
        raise ValueError("sample size must be positive")
    return int(math.floor(4.0 + 0.5 * math.log(n)))


@dataclass(frozen=True)
class FourierCoefficients:
    """Estimated coefficients ``theta_hat_0..theta_hat_jmax``.

    ``kind="ht"`` marks design-weighted estimates; ``kind="iid"`` marks plain
    sample means, for which ``N`` is the sample size and ``delta`` is -1 (the
    value that turns the design variance into the i.i.d. variance).
    """

    theta: np.ndarray
    N: int
    n: int
    delta: float
    kind: str = "ht"

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", theta)
        if theta.ndim != 1 or theta.size < 2:
            raise ValueError("need coefficients for at least j = 0, 1")
        if self.kind not in ("ht", "iid"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")

    @property
    def j_max(self) -> int:
        return self.theta.size - 1

    @property
    def calibration_error(self) -> float:
        """``theta_hat_0 - 1``; zero when the weights sum to ``N``."""
        return float(self.theta[0] - 1.0)


@dataclass(frozen=True)
class DensityEstimate:
    """Series estimate: coefficients, shrinkage weights ``w_1..w_J`` and scaling."""

    coeffs: FourierCoefficients
    w: np.ndarray
    scaling: ScalingTransform
    method: str

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.w, dtype=float))
        object.__setattr__(self, "w", w)
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if w.size > self.coeffs.j_max:
            raise ValueError("more shrinkage weights than coefficients")
        if np.any(~np.isfinite(w)) or np.any(w < 0) or np.any(w > 1):
            raise ValueError("shrinkage weights must lie in [0, 1]")

    @property
    def J(self) -> int:
        return int(self.w.size)

    def terms(self) -> np.ndarray:
        """``w_j theta_hat_j`` for ``j = 1..J``."""
        return self.w * self.coeffs.theta[1 : self.J + 1]

    def __call__(self, u):
        return evaluate(self, u)


@dataclass(frozen=True)
class ValidDensity:
    """``max(0, f_hat - c)`` with ``c`` chosen so the grid integral is one."""

    base: DensityEstimate
    c: float
    grid: np.ndarray
    values: np.ndarray = field(repr=False)

    def __call__(self, u):
        out = np.maximum(0.0, np.asarray(evaluate(self.base, u)) - self.c)
        return float(out) if out.ndim == 0 else out

    def integral(self) -> float:
        return trapezoid(self.values, self.grid)


# -- quadrature -------------------------------------------------------------


def unit_grid(G: int) -> np.ndarray:
    if G < 2:
        raise ValueError("grid needs at least two points")
    return np.linspace(0.0, 1.0, G)


def trapezoid_weights(G: int) -> np.ndarray:
    h = 1.0 / (G - 1)
    wts = np.full(G, h)
    wts[0] = wts[-1] = h / 2
    return wts


def trapezoid(values, grid) -> float:
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    return float(np.sum(np.diff(grid) * (values[1:] + values[:-1])) / 2)


# -- coefficients -----------------------------------------------------------


def _exact_column_sums(mat: np.ndarray) -> np.ndarray:
    # correctly rounded, so the result does not depend on sample order
    return np.array([math.fsum(col) for col in mat.T])


def ht_coefficients(
    sample: WeightedSample, scaling: ScalingTransform, j_max: int
) -> FourierCoefficients:
    """HT estimates ``N^-1 sum d_i phi_j(x_i)`` for ``j = 0..j_max``.

    Raises :class:`~surveyseries.basis.DomainError` if a scaled observation
    falls outside [0, 1].
    """
    if j_max < 1:
        raise ValueError("j_max must be positive")
    u = check_unit(scaling.forward(sample.values))
    theta = _exact_column_sums(sample.weights[:, None] * design_matrix(u, j_max)) / sample.N
    return FourierCoefficients(theta, sample.N, sample.n, sample.delta)


def iid_coefficients(values, scaling: ScalingTransform, j_max: int) -> FourierCoefficients:
    """Unweighted sample means of ``phi_j``, ignoring the design."""
    u = check_unit(scaling.forward(np.asarray(values, dtype=float)))
    n = u.size
    theta = _exact_column_sums(design_matrix(u, j_max)) / n
    return FourierCoefficients(theta, n, n, -1.0, kind="iid")


def population_coefficients(population, scaling: ScalingTransform, j_max: int) -> np.ndarray:
    """Finite-population coefficients ``theta_U_j = N^-1 sum_U phi_j(x_i)``."""
    return iid_coefficients(population, scaling, j_max).theta


def b_hat(coeffs: FourierCoefficients, j):
    """Plug-in variance constant for coefficient ``j`` (scalar or array of indices).

    Design-weighted: ``2 + sqrt(2) theta_2j + (delta - 1) theta_j^2``.
    I.i.d.: ``1 + theta_2j / sqrt(2) - theta_j^2``.
    """
    j = np.asarray(j)
    if np.any(j < 1):
        raise IndexError("b_hat is defined for j >= 1")
    if np.any(2 * j > coeffs.j_max):
        raise IndexError(
            f"b_hat for j={int(np.max(j))} needs theta up to {2 * int(np.max(j))}, "
            f"have {coeffs.j_max}"
        )
    th = coeffs.theta
    if coeffs.kind == "iid":
        out = 1.0 + INV_SQRT2 * th[2 * j] - th[j] ** 2
    else:
        out = 2.0 + SQRT2 * th[2 * j] + (coeffs.delta - 1.0) * th[j] ** 2
    return float(out) if out.ndim == 0 else out


def select_J(coeffs: FourierCoefficients, cap: int | None = None) -> int:
    """Minimize ``sum_{j<=J} (2 b_hat_j / N - theta_hat_j^2)`` over ``J = 0..cap``.

    The empty sum scores 0 and ties go to the smaller ``J``.
    """
    if cap is None:
        cap = j_cap(coeffs.n)
    if cap == 0:
        return 0
    j = np.arange(1, cap + 1)
    crit = 2.0 * b_hat(coeffs, j) / coeffs.N - coeffs.theta[j] ** 2
    scores = np.concatenate(([0.0], np.cumsum(crit)))
    return int(np.argmin(scores))


def smoothing_weights(coeffs: FourierCoefficients, J: int) -> np.ndarray:
    """Plug-in ``(theta_hat_j^2 - b_hat_j / N) / theta_hat_j^2`` clipped to [0, 1]."""
    if J == 0:
        return np.zeros(0)
    j = np.arange(1, J + 1)
    th2 = coeffs.theta[j] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = (th2 - b_hat(coeffs, j) / coeffs.N) / th2
    return np.clip(np.where(th2 > 0, raw, 0.0), 0.0, 1.0)


# -- estimators -------------------------------------------------------------


def oracle_estimator(sample: WeightedSample, scaling: ScalingTransform, w) -> DensityEstimate:
    """Estimate with user-fixed shrinkage weights ``w_1..w_J``."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    coeffs = ht_coefficients(sample, scaling, max(2 * w.size, 1))
    return DensityEstimate(coeffs, w, scaling, "oracle")


def truncated_estimator(
    sample: WeightedSample, scaling: ScalingTransform, cap: int | None = None
) -> DensityEstimate:
    """Keep the first ``J_hat`` coefficients unshrunk."""
    cap = j_cap(sample.n) if cap is None else cap
    coeffs = ht_coefficients(sample, scaling, max(2 * cap, 1))
    J = select_J(coeffs, cap)
    return DensityEstimate(coeffs, np.ones(J), scaling, "truncated")


def smoothed_estimator(
    sample: WeightedSample, scaling: ScalingTransform, cap: int | None = None
) -> DensityEstimate:
    """Truncated estimator with each retained coefficient shrunk by its plug-in weight."""
    cap = j_cap(sample.n) if cap is None else cap
    coeffs = ht_coefficients(sample, scaling, max(2 * cap, 1))
    J = select_J(coeffs, cap)
    return DensityEstimate(coeffs, smoothing_weights(coeffs, J), scaling, "smoothed")


def iid_baseline_estimator(
    sample: WeightedSample | np.ndarray, scaling: ScalingTransform, cap: int | None = None
) -> DensityEstimate:
    """Truncated series estimator that ignores weights and population size."""
    values = sample.values if isinstance(sample, WeightedSample) else np.asarray(sample)
    cap = j_cap(values.size) if cap is None else cap
    coeffs = iid_coefficients(values, scaling, max(2 * cap, 1))
    J = select_J(coeffs, cap)
    return DensityEstimate(coeffs, np.ones(J), scaling, "iid-baseline")


ESTIMATORS = {
    "truncated": truncated_estimator,
    "smoothed": smoothed_estimator,
    "iid-baseline": iid_baseline_estimator,
}


def fit(method: str, sample: WeightedSample, scaling: ScalingTransform, cap: int | None = None):
    try:
        return ESTIMATORS[method](sample, scaling, cap)
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(ESTIMATORS)}") from None


# -- evaluation and variances ----------------------------------------------


def evaluate(est: DensityEstimate, u):
    """``1 + sum_j w_j theta_hat_j phi_j(u)``; may be negative before projection."""
    u = check_unit(u)
    if est.J == 0:
        out = np.ones_like(u)
    else:
        j = np.arange(1, est.J + 1)
        out = 1.0 + SQRT2 * np.cos(math.pi * np.multiply.outer(u, j)) @ est.terms()
    return float(out) if out.ndim == 0 else out


def _double_freq_factor(est: DensityEstimate, u) -> np.ndarray:
    # 1 + phi_2j(u) / sqrt(2) = phi_j(u)^2 for j >= 1
    j = np.arange(1, est.J + 1)
    return 1.0 + np.cos(2.0 * math.pi * np.multiply.outer(u, j))


def design_variance_hat(est: DensityEstimate, u):
    """Plug-in design variance of ``f_hat(u)`` for fixed weights.

    ``N^-1 sum_j w_j^2 (1 + theta_hat_2j / sqrt(2) + delta theta_hat_j^2)
    (1 + phi_2j(u) / sqrt(2))``. Per-frequency variances are summed without
    cross-frequency covariances. Standardize with the square root.
    """
    u = check_unit(u)
    c = est.coeffs
    if est.J == 0:
        out = np.zeros_like(u)
    else:
        j = np.arange(1, est.J + 1)
        if 2 * est.J > c.j_max:
            raise IndexError(f"need theta up to {2 * est.J}, have {c.j_max}")
        per_j = est.w**2 * (1.0 + INV_SQRT2 * c.theta[2 * j] + c.delta * c.theta[j] ** 2)
        out = _double_freq_factor(est, u) @ per_j / c.N
    return float(out) if out.ndim == 0 else out


def combined_variance(est: DensityEstimate, u):
    """Plug-in model-plus-design variance ``N^-1 sum_j w_j^2 b_hat_j (1 + phi_2j(u)/sqrt(2))``."""
    u = check_unit(u)
    c = est.coeffs
    if est.J == 0:
        out = np.zeros_like(u)
    else:
        per_j = est.w**2 * b_hat(c, np.arange(1, est.J + 1))
        out = _double_freq_factor(est, u) @ per_j / c.N
    return float(out) if out.ndim == 0 else out


# -- projection onto densities ---------------------------------------------


def projection_constant(values, grid, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Constant ``c`` with ``trapezoid(max(0, values - c)) == 1``, by bisection.

    ``c = 0`` when the values are already nonnegative with unit mass.
    """
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    wts = np.diff(grid)
    quad = np.zeros(values.size)
    quad[:-1] += wts / 2
    quad[1:] += wts / 2

    def mass(c):
        return float(quad @ np.maximum(0.0, values - c))

    lo = min(0.0, float(values.min()))
    hi = float(values.max())
    m_lo = mass(lo)
    if values.min() >= 0 and abs(m_lo - 1.0) <= 1e-9:
        return 0.0
    if m_lo < 1.0 - 1e-9:
        raise ProjectionError(f"estimate has mass {m_lo:.6g} < 1; cannot normalize")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mass(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def project_to_density(est: DensityEstimate, G: int = 1024) -> ValidDensity:
    """Project onto nonnegative densities on a ``G``-point grid."""
    if G < 256:
        raise ValueError("grid must have at least 256 points")
    grid = unit_grid(G)
    raw = evaluate(est, grid)
    c = projection_constant(raw, grid)
    return ValidDensity(est, c, grid, np.maximum(0.0, raw - c))
