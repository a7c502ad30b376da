import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import (
    brute_delta,
    enumerate_design,
    poisson_joint,
    srswor_joint,
    srswor_space,
    stratified_joint,
)
from surveyseries.design import (
    SRSWOR,
    EmptySampleError,
    Poisson,
    StratifiedOversample,
    StratifiedProportional,
    SystematicPPS,
    WeightedSample,
    delta,
    design_from_dict,
    design_to_dict,
    draw_sample,
    first_order_pi,
    ht_mean,
    informative_size,
    oversample_pi,
    proportional_allocation,
    proportional_pi,
)


def test_srswor_pi():
    np.testing.assert_allclose(first_order_pi(SRSWOR(3), np.arange(10.0)), 0.3)


def test_informative_pi_equal_values():
    np.testing.assert_allclose(first_order_pi(Poisson(10), np.full(100, 2.5)), 0.1)


def test_informative_pi_hand_example():
    pi = first_order_pi(Poisson(1), [-4.5, 0.0, 20.0])
    assert pi[0] < 1e-11
    np.testing.assert_allclose(pi[1:], [1 / 3, 2 / 3], atol=1e-11)
    assert pi.sum() == pytest.approx(1.0, abs=1e-12)


def test_informative_pi_clips_and_renormalizes():
    # one huge size measure would get pi > 1 under plain scaling
    size = np.array([100.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    pi = proportional_pi(size, 3)
    assert pi[0] == 1.0
    np.testing.assert_allclose(pi[1:], 0.4)
    assert pi.sum() == pytest.approx(3.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-10, 50), min_size=2, max_size=60),
    st.floats(0.05, 1.0),
)
def test_pi_invariants(values, frac):
    x = np.asarray(values)
    if np.all(informative_size(x) == 0):
        with pytest.raises(ValueError):
            proportional_pi(informative_size(x), 1)
        return
    n = max(1.0, frac * x.size)
    pi = Poisson(n).first_order_pi(x)
    assert np.all(pi > 0) and np.all(pi <= 1.0)
    assert math.fsum(pi) == pytest.approx(n, abs=1e-9)


def test_pi_errors():
    with pytest.raises(ValueError):
        first_order_pi(SRSWOR(11), np.arange(10.0))
    with pytest.raises(ValueError):
        first_order_pi(Poisson(1), [-6.0, -5.0, -4.5])  # every log term is 0


def test_enumerated_srswor_matches_joint_formula():
    pi, pik = enumerate_design(6, srswor_space(6, 3))
    pi2, pik2 = srswor_joint(6, 3)
    np.testing.assert_allclose(pi, pi2, atol=1e-15)
    np.testing.assert_allclose(pik, pik2, atol=1e-15)


def test_delta_census():
    assert delta(SRSWOR(10), 10) == pytest.approx(-0.1)
    assert brute_delta(*srswor_joint(10, 10)) == pytest.approx(-0.1, abs=1e-12)


def test_delta_srswor_brute_force():
    assert delta(SRSWOR(100), 1000) == pytest.approx(-0.01, abs=1e-15)
    pi, pik = srswor_joint(1000, 100)
    # vectorized double sum; the explicit loop version is exercised at N <= 200
    ratio = pik / np.outer(pi, pi)
    np.fill_diagonal(ratio, 0.0)
    assert abs(ratio.sum() / 1000**2 - 1 - delta(SRSWOR(100), 1000)) < 1e-10


def test_delta_poisson_brute_force(rng):
    assert delta(Poisson(100), 1000) == pytest.approx(-0.001)
    x = rng.normal(size=150)
    pi = first_order_pi(Poisson(30), x)
    assert abs(brute_delta(*poisson_joint(pi)) - delta(Poisson(30), 150)) < 1e-10


@pytest.mark.parametrize("n", [5, 20, 50, 200])
def test_delta_srswor_loop(n):
    assert abs(brute_delta(*srswor_joint(200, n)) - delta(SRSWOR(n), 200)) < 1e-10


@pytest.mark.parametrize("boundaries, n", [((0.0,), 20), ((-0.5, 0.5), 30), ((0.0,), 200)])
def test_delta_stratified_brute_force(rng, boundaries, n):
    x = rng.normal(size=200)
    d = StratifiedProportional(n, boundaries)
    labels = d.strata(x)
    nh = d.allocation(x)
    got = delta(d, 200, d.stratum_sizes(x))
    assert abs(brute_delta(*stratified_joint(labels, nh)) - got) < 1e-10


def test_delta_requires_two_units():
    with pytest.raises(ValueError):
        delta(Poisson(1), 1)
    with pytest.raises(ValueError):
        delta(SRSWOR(1), 1)


def test_systematic_delta_default_and_override():
    assert delta(SystematicPPS(40), 1000) == pytest.approx(-1 / 40)
    assert delta(SystematicPPS(40, delta_override=-0.003), 1000) == -0.003


def test_srswor_draw(rng):
    s = draw_sample(SRSWOR(5), np.arange(100.0), rng)
    assert s.n == 5 and len(set(s.indices)) == 5
    np.testing.assert_array_equal(s.weights, 20.0)
    assert s.delta == pytest.approx(-0.2)


def test_stratified_allocation_and_draw(rng):
    x = np.concatenate([np.full(400, -1.0), np.full(600, 1.0)])
    d = StratifiedProportional(50, (0.0,))
    np.testing.assert_array_equal(d.allocation(x), [20, 30])
    s = draw_sample(d, rng.permutation(x), rng)
    assert np.sum(s.strata == 0) == 20 and np.sum(s.strata == 1) == 30
    assert s.weights.sum() == pytest.approx(1000.0)


@given(st.lists(st.integers(1, 500), min_size=1, max_size=6), st.data())
def test_proportional_allocation_sums_to_n(sizes, data):
    N = sum(sizes)
    n = data.draw(st.integers(len(sizes), N))
    alloc = proportional_allocation(n, sizes)
    assert alloc.sum() == n
    assert np.all(alloc >= 1) and np.all(alloc <= np.asarray(sizes))


def test_poisson_mean_size():
    x = np.random.default_rng(3).normal(size=1000)
    d = Poisson(100)
    pi = d.first_order_pi(x)
    sizes = np.array([d.draw(x, np.random.default_rng(s)).n for s in range(10_000)])
    se = math.sqrt(np.sum(pi * (1 - pi))) / math.sqrt(sizes.size)
    assert abs(sizes.mean() - 100) < 3 * se


def test_poisson_empty_draw_is_redrawn_or_signalled():
    x = np.linspace(-1, 1, 1000)

    class Unlucky:
        def __init__(self):
            self.calls = 0
            self.inner = np.random.default_rng(0)

        def random(self, size):
            self.calls += 1
            return np.ones(size) if self.calls < 3 else self.inner.random(size)

    s = Poisson(5).draw(x, Unlucky())
    assert s.redraws == 2 and s.n >= 1

    class Hopeless:
        def random(self, size):
            return np.ones(size)

    with pytest.raises(EmptySampleError):
        Poisson(5).draw(x, Hopeless())


def test_systematic_draw(rng):
    x = rng.normal(size=1000)
    d = SystematicPPS(60)
    pi = d.first_order_pi(x)
    s = d.draw(x, rng)
    assert abs(s.n - 60) <= 1
    np.testing.assert_allclose(s.weights, 1 / pi[s.indices])


def test_systematic_inclusion_frequencies():
    x = np.random.default_rng(5).normal(size=40)
    d = SystematicPPS(8)
    pi = d.first_order_pi(x)
    hits = np.zeros(40)
    reps = 20_000
    for seed in range(reps):
        hits[d.draw(x, np.random.default_rng(seed)).indices] += 1
    se = np.sqrt(pi * (1 - pi) / reps)
    assert np.all(np.abs(hits / reps - pi) < 4.5 * se + 1e-12)


@pytest.mark.parametrize(
    "design",
    [SRSWOR(40), StratifiedProportional(40, (0.0,)), SystematicPPS(40), Poisson(40)],
)
def test_weight_sum_sanity_band(rng, design):
    x = rng.normal(size=1000)
    s = design.draw(x, rng)
    assert abs(s.weights.sum() - 1000) < 0.25 * 1000


def test_ht_mean_unbiased_under_srswor():
    rng = np.random.default_rng(11)
    pop = rng.gamma(2.0, size=200)
    d = SRSWOR(20)
    est = np.array([ht_mean(s.values, s.weights, 200) for s in
                    (d.draw(pop, rng) for _ in range(20_000))])
    se = est.std(ddof=1) / math.sqrt(est.size)
    assert abs(est.mean() - pop.mean()) < 4 * se


def test_oversample_pi_examples():
    assert oversample_pi([150_000], [0], 1500, 150_000)[0] == pytest.approx(0.01)
    assert oversample_pi([10_000], [200], 1500, 150_000)[0] == pytest.approx(0.03)
    assert oversample_pi([50], [50], 0, 1000)[0] == 1.0
    with pytest.raises(ValueError):
        oversample_pi([100], [90], 500, 1000)


def test_oversample_design_draw(rng):
    x = rng.normal(size=2000)
    d = StratifiedOversample((30, 0), 100, (1.0,))
    pi = d.first_order_pi(x)
    s = d.draw(x, rng)
    assert 100 <= s.n <= 130
    np.testing.assert_allclose(s.weights, 1 / pi[s.indices])


def test_weighted_sample_validation():
    with pytest.raises(ValueError):
        WeightedSample([1.0, 2.0], [1.0], 10, -0.5)
    with pytest.raises(ValueError):
        WeightedSample([1.0], [0.5], 10, -1.0)


@pytest.mark.parametrize(
    "design",
    [SRSWOR(5), Poisson(5, informative=False), SystematicPPS(5, delta_override=-0.1),
     StratifiedProportional(5, (-1.0, 1.0)), StratifiedOversample((2, 3), 10, (0.0,))],
)
def test_design_dict_roundtrip(design):
    assert design_from_dict(design_to_dict(design)) == design
