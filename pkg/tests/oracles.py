"""Independent reference computations used by the tests.

Nothing here calls the closed forms under test: joint inclusion probabilities
come from their definitions (or full enumeration), integrals from dense
quadrature.
"""

import itertools
import math

import numpy as np


def enumerate_design(N, samples_with_prob):
    """First- and second-order inclusion probabilities from an explicit sample space."""
    pi = np.zeros(N)
    pik = np.zeros((N, N))
    for s, p in samples_with_prob:
        s = list(s)
        pi[s] += p
        pik[np.ix_(s, s)] += p
    return pi, pik


def srswor_space(N, n):
    combos = list(itertools.combinations(range(N), n))
    return [(c, 1.0 / len(combos)) for c in combos]


def srswor_joint(N, n):
    pi = np.full(N, n / N)
    pik = np.full((N, N), n * (n - 1) / (N * (N - 1)))
    np.fill_diagonal(pik, pi)
    return pi, pik


def poisson_joint(pi):
    pi = np.asarray(pi, dtype=float)
    pik = np.outer(pi, pi)
    np.fill_diagonal(pik, pi)
    return pi, pik


def stratified_joint(labels, nh):
    labels = np.asarray(labels)
    N = labels.size
    Nh = np.bincount(labels)
    pi = (np.asarray(nh) / Nh)[labels]
    pik = np.outer(pi, pi)
    for h in range(Nh.size):
        members = np.flatnonzero(labels == h)
        same = nh[h] * (nh[h] - 1) / (Nh[h] * (Nh[h] - 1)) if Nh[h] > 1 else 0.0
        pik[np.ix_(members, members)] = same
    np.fill_diagonal(pik, pi)
    return pi, pik


def brute_delta(pi, pik):
    """N^-2 sum_{i != k} pi_ik / (pi_i pi_k) - 1 by explicit double loop."""
    N = len(pi)
    terms = []
    for i in range(N):
        for k in range(N):
            if i != k:
                terms.append(pik[i, k] / (pi[i] * pi[k]))
    return math.fsum(terms) / N**2 - 1.0


def fine_trapezoid(f, a=0.0, b=1.0, points=100_001):
    x = np.linspace(a, b, points)
    y = f(x)
    return float(np.sum((y[1:] + y[:-1]) * np.diff(x)) / 2)
