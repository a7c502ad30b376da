"""Sampling designs over a finite population.

Each design knows its first-order inclusion probabilities, how to draw a
sample, and the design quantity

    delta = N^-2 * sum_{i != k} pi_ik / (pi_i pi_k) - 1

that enters the design variance of Horvitz-Thompson means.

Informative designs use size measures ``log(max(x + 5, 1))``. The size
measures are scaled so the probabilities sum to ``n``; any probability that
would exceed one is set to one and the rest are rescaled, repeating until
nothing exceeds one. Zero size measures are floored at ``SIZE_FLOOR``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

SIZE_FLOOR = 1e-12
MAX_REDRAWS = 100


class EmptySampleError(RuntimeError):
    """A random-size design produced no units within the redraw budget."""


@dataclass(frozen=True)
class WeightedSample:
    """Sampled values with HT weights ``d_i = 1 / pi_i``."""

    values: np.ndarray
    weights: np.ndarray
    N: int
    delta: float
    strata: Optional[np.ndarray] = None
    indices: Optional[np.ndarray] = None
    redraws: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        if values.ndim != 1 or values.shape != weights.shape:
            raise ValueError("values and weights must be 1-d arrays of equal length")
        if values.size < 1:
            raise ValueError("sample must contain at least one unit")
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(weights)):
            raise ValueError("values and weights must be finite")
        if np.any(weights < 1.0 - 1e-9):
            raise ValueError("sampling weights must be >= 1 (they are inverse probabilities)")
        if self.N < 1:
            raise ValueError("population size must be positive")

    @property
    def n(self) -> int:
        return int(self.values.size)


# -- size measures ----------------------------------------------------------


def informative_size(x) -> np.ndarray:
    """Size measure ``log(max(x + 5, 1))``."""
    return np.log(np.maximum(np.asarray(x, dtype=float) + 5.0, 1.0))


def proportional_pi(size, n: float) -> np.ndarray:
    """Inclusion probabilities proportional to ``size`` summing to ``n``, capped at 1."""
    size = np.asarray(size, dtype=float)
    N = size.size
    if n > N:
        raise ValueError(f"sample size {n} exceeds population size {N}")
    if n <= 0:
        raise ValueError("sample size must be positive")
    if np.any(size < 0) or not np.any(size > 0):
        raise ValueError("size measures must be nonnegative and not all zero")
    size = np.maximum(size, SIZE_FLOOR)
    pi = np.empty(N)
    capped = np.zeros(N, dtype=bool)
    for _ in range(N):
        free = ~capped
        pi[capped] = 1.0
        pi[free] = size[free] * (n - capped.sum()) / size[free].sum()
        over = free & (pi >= 1.0)
        if not over.any():
            break
        capped |= over
    pi[capped] = 1.0
    return pi


def stratum_labels(x, boundaries: Sequence[float]) -> np.ndarray:
    """Stratum index of each value for sorted cut points (``h`` counts cuts <= x)."""
    cuts = np.asarray(boundaries, dtype=float)
    if cuts.size and np.any(np.diff(cuts) <= 0):
        raise ValueError("stratum boundaries must be strictly increasing")
    return np.searchsorted(cuts, np.asarray(x, dtype=float), side="right")


def proportional_allocation(n: int, stratum_sizes: Sequence[int]) -> np.ndarray:
    """Allocate ``n`` as ``n * N_h / N``, rounded by largest remainder."""
    sizes = np.asarray(stratum_sizes, dtype=int)
    N = int(sizes.sum())
    if np.any(sizes <= 0):
        raise ValueError("every stratum must be nonempty")
    if n > N:
        raise ValueError(f"sample size {n} exceeds population size {N}")
    if n < sizes.size:
        raise ValueError("need at least one sampled unit per stratum")
    exact = n * sizes / N
    alloc = np.floor(exact).astype(int)
    order = np.argsort(-(exact - alloc), kind="stable")
    alloc[order[: n - alloc.sum()]] += 1
    # every stratum needs a unit; move one from the largest allocation if not
    for h in np.flatnonzero(alloc == 0):
        alloc[np.argmax(alloc)] -= 1
        alloc[h] = 1
    return np.minimum(alloc, sizes)


def oversample_pi(stratum_sizes, stratum_n, n_phase1: int, N: int) -> np.ndarray:
    """Approximate inclusion probabilities ``n_h / N_h + n / N`` for a two-phase oversample.

    Phase one is an SRSWOR of ``n_phase1`` units from the whole population of
    size ``N``; phase two adds a stratified sample of ``stratum_n[h]`` units in
    stratum ``h``. Strata that receive no oversample get ``n / N``.
    """
    Nh = np.asarray(stratum_sizes, dtype=float)
    nh = np.asarray(stratum_n, dtype=float)
    if Nh.shape != nh.shape:
        raise ValueError("stratum sizes and stratum sample sizes must align")
    if N <= 0 or np.any(Nh <= 0) or np.any(nh < 0) or n_phase1 < 0:
        raise ValueError("sizes must be positive and sample sizes nonnegative")
    if np.any(nh > Nh):
        raise ValueError("stratum sample size exceeds stratum size")
    pi = nh / Nh + n_phase1 / N
    if np.any(pi > 1.0 + 1e-12):
        raise ValueError(f"inclusion probability exceeds 1: {pi.max():.6g}")
    return np.minimum(pi, 1.0)


# -- designs ----------------------------------------------------------------


@dataclass(frozen=True)
class SRSWOR:
    """Simple random sampling without replacement of ``n`` units."""

    n: int
    name: str = field(default="srswor", init=False)

    def first_order_pi(self, population) -> np.ndarray:
        N = len(population)
        _check_n(self.n, N)
        return np.full(N, self.n / N)

    def delta(self, N: int, stratum_sizes=None) -> float:
        if N < 2:
            raise ValueError("delta needs N >= 2")
        _check_n(self.n, N)
        return -1.0 / self.n

    def draw(self, population, rng: np.random.Generator) -> WeightedSample:
        x = np.asarray(population, dtype=float)
        N = x.size
        _check_n(self.n, N)
        idx = np.sort(rng.choice(N, size=self.n, replace=False))
        return WeightedSample(
            x[idx], np.full(self.n, N / self.n), N, self.delta(N), indices=idx
        )


@dataclass(frozen=True)
class Poisson:
    """Poisson sampling with expected size ``n``.

    Each unit enters independently with probability ``pi_i``. With
    ``informative=True`` the probabilities follow the log size measure,
    otherwise they are all ``n / N``.
    """

    n: float
    informative: bool = True
    name: str = field(default="poisson", init=False)

    def first_order_pi(self, population) -> np.ndarray:
        x = np.asarray(population, dtype=float)
        _check_n(self.n, x.size)
        if self.informative:
            return proportional_pi(informative_size(x), self.n)
        return np.full(x.size, self.n / x.size)

    def delta(self, N: int, stratum_sizes=None) -> float:
        if N < 2:
            raise ValueError("delta needs N >= 2")
        return -1.0 / N

    def draw(self, population, rng: np.random.Generator) -> WeightedSample:
        x = np.asarray(population, dtype=float)
        pi = self.first_order_pi(x)
        for redraws in range(MAX_REDRAWS + 1):
            idx = np.flatnonzero(rng.random(x.size) < pi)
            if idx.size:
                return WeightedSample(
                    x[idx], 1.0 / pi[idx], x.size, self.delta(x.size),
                    indices=idx, redraws=redraws,
                )
        raise EmptySampleError(f"Poisson draw empty after {MAX_REDRAWS} redraws")


@dataclass(frozen=True)
class SystematicPPS:
    """Unequal-probability systematic sampling with a single random start.

    Units are traversed in population order; unit ``i`` is selected when a
    point ``start + k`` (``k = 0, 1, ...``) falls in its slice of the
    cumulative inclusion probabilities. There are no closed-form joint
    probabilities, so ``delta`` defaults to the equal-probability value
    ``-1/n`` unless ``delta_override`` is given.
    """

    n: int
    informative: bool = True
    delta_override: Optional[float] = None
    name: str = field(default="systematic", init=False)

    def first_order_pi(self, population) -> np.ndarray:
        x = np.asarray(population, dtype=float)
        _check_n(self.n, x.size)
        if self.informative:
            return proportional_pi(informative_size(x), self.n)
        return np.full(x.size, self.n / x.size)

    def delta(self, N: int, stratum_sizes=None) -> float:
        if N < 2:
            raise ValueError("delta needs N >= 2")
        if self.delta_override is not None:
            return float(self.delta_override)
        return -1.0 / self.n

    def draw(self, population, rng: np.random.Generator) -> WeightedSample:
        x = np.asarray(population, dtype=float)
        pi = self.first_order_pi(x)
        start = rng.random()
        upper = np.cumsum(pi)
        lower = np.concatenate(([0.0], upper[:-1]))
        idx = np.flatnonzero(np.floor(upper - start) > np.floor(lower - start))
        if idx.size == 0:
            raise EmptySampleError("systematic draw selected no units")
        return WeightedSample(
            x[idx], 1.0 / pi[idx], x.size, self.delta(x.size), indices=idx
        )


@dataclass(frozen=True)
class StratifiedProportional:
    """Stratified SRSWOR with proportional allocation ``n_h = n N_h / N``.

    Strata are intervals of the survey variable cut at ``boundaries``.
    """

    n: int
    boundaries: tuple = (0.0,)
    name: str = field(default="stratified", init=False)

    def __post_init__(self):
        object.__setattr__(self, "boundaries", tuple(float(b) for b in self.boundaries))

    def strata(self, population) -> np.ndarray:
        return stratum_labels(population, self.boundaries)

    def stratum_sizes(self, population) -> np.ndarray:
        labels = self.strata(population)
        return np.bincount(labels, minlength=len(self.boundaries) + 1)

    def allocation(self, population) -> np.ndarray:
        return proportional_allocation(self.n, self.stratum_sizes(population))

    def first_order_pi(self, population) -> np.ndarray:
        labels = self.strata(population)
        Nh = self.stratum_sizes(population)
        nh = proportional_allocation(self.n, Nh)
        return (nh / Nh)[labels]

    def delta(self, N: int, stratum_sizes=None) -> float:
        if N < 2:
            raise ValueError("delta needs N >= 2")
        if stratum_sizes is None:
            raise ValueError("stratified delta needs the stratum sizes")
        Nh = np.asarray(stratum_sizes, dtype=float)
        if int(Nh.sum()) != N:
            raise ValueError("stratum sizes must sum to N")
        nh = proportional_allocation(self.n, Nh.astype(int))
        # within-stratum SRSWOR pairs, independence across strata
        return -float(np.sum(Nh**2 / nh)) / N**2

    def draw(self, population, rng: np.random.Generator) -> WeightedSample:
        x = np.asarray(population, dtype=float)
        labels = self.strata(x)
        Nh = np.bincount(labels, minlength=len(self.boundaries) + 1)
        nh = proportional_allocation(self.n, Nh)
        picks, weights = [], []
        for h, (size, take) in enumerate(zip(Nh, nh)):
            members = np.flatnonzero(labels == h)
            picks.append(np.sort(rng.choice(members, size=take, replace=False)))
            weights.append(np.full(take, size / take))
        idx = np.concatenate(picks)
        return WeightedSample(
            x[idx], np.concatenate(weights), x.size, self.delta(x.size, Nh),
            strata=labels[idx], indices=idx,
        )


@dataclass(frozen=True)
class StratifiedOversample:
    """Phase-one SRSWOR plus a stratified oversample, as in two-phase surveys.

    Units reached by both phases appear once. Weights use the approximate
    probabilities from :func:`oversample_pi`. ``delta`` defaults to ``-1/m``
    with ``m`` the expected number of sampled units.
    """

    stratum_n: tuple
    n_phase1: int
    boundaries: tuple
    delta_override: Optional[float] = None
    name: str = field(default="oversample", init=False)

    def __post_init__(self):
        object.__setattr__(self, "stratum_n", tuple(int(v) for v in self.stratum_n))
        object.__setattr__(self, "boundaries", tuple(float(b) for b in self.boundaries))
        if len(self.stratum_n) != len(self.boundaries) + 1:
            raise ValueError("need one stratum sample size per stratum")

    def strata(self, population) -> np.ndarray:
        return stratum_labels(population, self.boundaries)

    def first_order_pi(self, population) -> np.ndarray:
        labels = self.strata(population)
        Nh = np.bincount(labels, minlength=len(self.stratum_n))
        if np.any(Nh == 0):
            raise ValueError("every stratum must be nonempty")
        pi_h = oversample_pi(Nh, self.stratum_n, self.n_phase1, len(labels))
        return pi_h[labels]

    def delta(self, N: int, stratum_sizes=None) -> float:
        if N < 2:
            raise ValueError("delta needs N >= 2")
        if self.delta_override is not None:
            return float(self.delta_override)
        return -1.0 / (self.n_phase1 + sum(self.stratum_n))

    def draw(self, population, rng: np.random.Generator) -> WeightedSample:
        x = np.asarray(population, dtype=float)
        N = x.size
        labels = self.strata(x)
        pi = self.first_order_pi(x)
        chosen = np.zeros(N, dtype=bool)
        if self.n_phase1:
            chosen[rng.choice(N, size=self.n_phase1, replace=False)] = True
        for h, take in enumerate(self.stratum_n):
            if take:
                members = np.flatnonzero(labels == h)
                chosen[rng.choice(members, size=take, replace=False)] = True
        idx = np.flatnonzero(chosen)
        if idx.size == 0:
            raise EmptySampleError("oversample design selected no units")
        return WeightedSample(
            x[idx], 1.0 / pi[idx], N, self.delta(N), strata=labels[idx], indices=idx
        )


DesignSpec = Union[SRSWOR, Poisson, SystematicPPS, StratifiedProportional, StratifiedOversample]

DESIGNS = {
    "srswor": SRSWOR,
    "poisson": Poisson,
    "systematic": SystematicPPS,
    "stratified": StratifiedProportional,
    "oversample": StratifiedOversample,
}


def _check_n(n: float, N: int) -> None:
    if n <= 0:
        raise ValueError("sample size must be positive")
    if n > N:
        raise ValueError(f"sample size {n} exceeds population size {N}")


# -- module-level entry points ---------------------------------------------


def first_order_pi(design: DesignSpec, population) -> np.ndarray:
    """First-order inclusion probabilities of every population unit."""
    return design.first_order_pi(population)


def delta(design: DesignSpec, N: int, stratum_sizes=None) -> float:
    """Closed-form (or approximate, for systematic and oversample designs) delta."""
    return design.delta(N, stratum_sizes)


def draw_sample(design: DesignSpec, population, rng: np.random.Generator) -> WeightedSample:
    """Draw one sample, attaching weights ``1 / pi_i`` and the design delta."""
    return design.draw(population, rng)


def design_with_n(design: DesignSpec, n: int) -> DesignSpec:
    """Copy of ``design`` with a different (expected) sample size."""
    if isinstance(design, StratifiedOversample):
        raise ValueError("oversample designs fix their sizes per stratum")
    return replace(design, n=n)


def design_from_dict(cfg: dict) -> DesignSpec:
    """Build a design from a config mapping such as ``{"type": "poisson", "n": 100}``."""
    cfg = dict(cfg)
    kind = cfg.pop("type")
    try:
        cls = DESIGNS[kind]
    except KeyError:
        raise ValueError(f"unknown design {kind!r}; choose from {sorted(DESIGNS)}") from None
    if "boundaries" in cfg:
        cfg["boundaries"] = tuple(cfg["boundaries"])
    if "stratum_n" in cfg:
        cfg["stratum_n"] = tuple(cfg["stratum_n"])
    return cls(**cfg)


def design_to_dict(design: DesignSpec) -> dict:
    out = {"type": design.name}
    out.update({k: (list(v) if isinstance(v, tuple) else v)
                for k, v in asdict(design).items() if k != "name"})
    return out


def ht_mean(values, weights, N: int) -> float:
    """Horvitz-Thompson estimate ``N^-1 sum d_i y_i`` of a population mean."""
    return math.fsum(np.asarray(weights, dtype=float) * np.asarray(values, dtype=float)) / N
