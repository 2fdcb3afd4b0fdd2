import math

import numpy as np
import pytest
from sklearn.base import clone

from heavychain.chaining import (
    AdmissibleSequence,
    BallAdmissible,
    GreedyAdmissible,
    gamma_beta_bruteforce,
    gamma_beta_value,
    greedy_admissible,
)
from heavychain.samplers import DistributionSpec, sample_matrix


def test_singleton_has_zero_increments():
    A = greedy_admissible(np.array([[1.0, -2.0]]))
    assert A.final_is_exact()
    for s in range(1, A.n_levels + 2):
        assert np.all(A.increments(s) == 0)
    assert gamma_beta_value(A, 2.0) == 0.0


def test_two_points_beta_two():
    T = np.array([[0.0, 0.0], [1.0, 0.0]])
    A = greedy_admissible(T)
    A.validate()
    assert gamma_beta_value(A, 2.0) == pytest.approx(1.0)
    assert gamma_beta_bruteforce(T, beta=2.0) == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(10))
def test_greedy_upper_bounds_bruteforce(seed):
    T = np.random.default_rng(seed).standard_normal((5, 3))
    A = greedy_admissible(T)
    A.validate()
    assert A.final_is_exact()
    assert gamma_beta_value(A, 2.0) >= gamma_beta_bruteforce(T, beta=2.0) - 1e-12


def test_increments_telescope():
    T = np.random.default_rng(3).standard_normal((9, 4))
    A = greedy_admissible(T, metric="linf", root="centroid")
    total = sum(A.increments(s) for s in range(A.n_levels))
    assert np.allclose(total, T)


def test_json_roundtrip():
    A = greedy_admissible(np.random.default_rng(4).standard_normal((7, 2)))
    B = AdmissibleSequence.from_json(A.to_json())
    assert np.array_equal(B.pool, A.pool)
    assert np.array_equal(B.assign, A.assign)
    assert B.eta.values.tolist() == A.eta.values.tolist()
    assert gamma_beta_value(B, 1.0) == gamma_beta_value(A, 1.0)


def test_bruteforce_limits():
    with pytest.raises(ValueError):
        gamma_beta_bruteforce(np.zeros((7, 2)))


def test_greedy_estimator_shape():
    T = np.random.default_rng(5).standard_normal((6, 3))
    est = GreedyAdmissible(metric="l2").fit(T)
    assert est.n_features_in_ == 3
    assert est.transform(T).shape == (6, est.sequence_.n_levels)
    assert est.get_params()["metric"] == "l2"
    assert clone(est).get_params() == est.get_params()
    assert est.gamma(2.0) == gamma_beta_value(est.sequence_, 2.0)


def test_ball_construction_support_and_exactness():
    n, p = 16, 3.0
    X = sample_matrix(DistributionSpec("gaussian"), 2000, n, 0)
    A = BallAdmissible(p=p, n_directions=20, seed=1).fit(X).sequence_
    s1 = A.meta["s1"]
    assert A.final_is_exact()
    for s in range(A.n_levels):
        supp = np.count_nonzero(A.points(s), axis=1)
        assert np.all(supp <= min(2 ** (s + s1), n))
    for s, c in enumerate(A.centers):
        assert np.all(np.isin(A.assign[s], c))
        assert c.size <= A.eta.budget(s, cap=A.pool.shape[0])


def test_ball_needs_calibration():
    from heavychain.chaining import ball_admissible

    with pytest.raises(ValueError):
        ball_admissible(8, 3.0)
