import math

import numpy as np
import pytest
from oracles import bernoulli_exhaustive_mean

from heavychain.chaining import bernoulli_sup_mc, exp_sup_E, gamma12_vs_E_check


def test_bernoulli_trivial_sets():
    assert np.all(bernoulli_sup_mc(np.zeros((1, 3)), 50) == 0)
    assert np.all(bernoulli_sup_mc(np.array([[1.0, 0.0, 0.0]]), 50) == 1)
    vals = bernoulli_sup_mc(np.array([[1.0, 1.0]]), 0)
    assert sorted(vals.tolist()) == [0.0, 0.0, 2.0, 2.0]


def test_exhaustive_matches_oracle():
    V = np.random.default_rng(0).standard_normal((3, 7))
    assert bernoulli_sup_mc(V, 0).mean() == pytest.approx(bernoulli_exhaustive_mean(V), rel=1e-12)


def test_exhaustive_limit():
    with pytest.raises(ValueError):
        bernoulli_sup_mc(np.ones((1, 21)), 0)


def test_mc_is_seeded():
    V = np.random.default_rng(1).standard_normal((4, 30))
    a, b = bernoulli_sup_mc(V, 5000, seed=3), bernoulli_sup_mc(V, 5000, seed=3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, bernoulli_sup_mc(V, 5000, seed=4))


def test_exp_sup_signed_unit_vector():
    T = np.array([[1.0, 0.0], [-1.0, 0.0]])
    E, se = exp_sup_E(T, trials=40000, seed=0)
    assert abs(E - 1 / math.sqrt(2)) < 4 * se


def test_exp_sup_euclidean_ball():
    n = 64
    E, se = exp_sup_E(n, trials=4000, seed=1, sup=np.linalg.norm)
    assert math.sqrt(n) * (1 - 5 / (2 * n)) - 4 * se <= E <= math.sqrt(n) + 4 * se


def test_sandwich_signed_unit_vector():
    res = gamma12_vs_E_check(np.array([[1.0, 0.0], [-1.0, 0.0]]), trials=40000)
    assert res.gamma1 == pytest.approx(1.0) and res.gamma2 == pytest.approx(1.0)
    assert res.ratio == pytest.approx(2 * math.sqrt(2), rel=0.03)
    assert res.ratio_low <= res.ratio <= res.ratio_high


def test_sandwich_singleton_not_applicable():
    res = gamma12_vs_E_check(np.array([[1.0, 2.0]]), trials=100)
    assert not res.applicable
    assert math.isnan(res.ratio_low)
