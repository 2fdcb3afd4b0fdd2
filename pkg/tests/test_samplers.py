import math

import numpy as np
import pytest

from heavychain.samplers import (
    DistributionSpec,
    TruncationError,
    abs_moment,
    calibrate_kappa1,
    coupon_miss_probability,
    derive_seed,
    lp_norms,
    sample_exponential_vector,
    sample_matrix,
    sample_scalar,
    tail_isf,
    tail_probability,
    truncate_to_lp_ball,
)


def test_rademacher_values():
    x = sample_scalar(DistributionSpec("rademacher"), 4, 1)
    assert set(np.unique(x)) <= {-1.0, 1.0}
    assert np.mean(x**2) == 1.0


def test_gaussian_fourth_moment():
    x = sample_scalar(DistributionSpec("gaussian"), 10**6, 2)
    assert abs(np.mean(x**4) - 3.0) < 0.05


def test_student_t_standardized_variance():
    spec = DistributionSpec("student_t", q=6, nu=8)
    x = sample_scalar(spec, 10**6, 3)
    assert abs(np.var(x) - 1.0) < 0.01


def test_student_t_rejects_infinite_moment():
    with pytest.raises(ValueError):
        DistributionSpec("student_t", q=6, nu=6)
    with pytest.raises(ValueError):
        DistributionSpec("sym_pareto", q=5, nu=4)


def test_default_shape_leaves_moment_slack():
    assert DistributionSpec("student_t", q=6).nu == 8


def test_unknown_kind_and_bad_q():
    with pytest.raises(ValueError):
        DistributionSpec("cauchy")
    with pytest.raises(ValueError):
        DistributionSpec("student_t", q=2)


def test_scalar_sampler_refuses_vector_law():
    with pytest.raises(ValueError):
        sample_scalar(DistributionSpec("coordinate_measure"), 3, 0)


@pytest.mark.parametrize("kind", ["sym_pareto", "laplace_exponential", "rademacher"])
def test_standardized_unit_variance(kind):
    spec = DistributionSpec(kind, q=3, nu=6) if kind == "sym_pareto" else DistributionSpec(kind)
    x = sample_scalar(spec, 400000, 4)
    assert abs(np.var(x) - 1.0) < 0.03
    assert abs(np.mean(x)) < 0.01


def test_coordinate_measure_rows():
    X = sample_matrix(DistributionSpec("coordinate_measure"), 3, 2, 5)
    for row in X.rows:
        assert sorted(row.tolist()) == [0.0, math.sqrt(2)]


def test_single_gaussian_entry():
    X = sample_matrix(DistributionSpec("gaussian"), 1, 1, 6)
    assert X.shape == (1, 1) and np.isfinite(X.rows).all()


def test_l1_ball_isotropic():
    X = sample_matrix(DistributionSpec("lp_ball_uniform", p=1), 10**4, 8, 7).rows
    C = X.T @ X / X.shape[0]
    assert np.linalg.norm(C - np.eye(8), 2) < 0.1


def test_lp_ball_uniform_inside_body():
    spec = DistributionSpec("lp_ball_uniform", p=3, standardized=False)
    X = sample_matrix(spec, 2000, 5, 8).rows
    assert np.all(lp_norms(X, 3) <= 1.0)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        sample_matrix(DistributionSpec("gaussian", n=3), 4, 5, 0)


def test_exponential_vector_moments():
    y = sample_exponential_vector(1, 10**6, 9).ravel()
    assert abs(np.var(y) - 1.0) < 0.01
    assert abs(np.mean(y)) < 0.005
    assert sample_exponential_vector(2, 1, 0).shape == (1, 2)


def test_determinism():
    spec = DistributionSpec("student_t", q=6)
    a = sample_matrix(spec, 20, 7, 11).rows
    b = sample_matrix(spec, 20, 7, 11).rows
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_matrix(spec, 20, 7, 12).rows)


def test_derive_seed_distinguishes_keys():
    assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2)
    assert len({derive_seed(1, "a", t) for t in range(100)}) == 100
    assert derive_seed(1, "a") != derive_seed(1, "b")


def test_truncation_inside_is_identity():
    X = sample_matrix(DistributionSpec("rademacher"), 10, 4, 1)
    Y, rate = truncate_to_lp_ball(X, 3, 2.0)
    assert rate == 0.0 and np.array_equal(X.rows, Y.rows)


def test_truncation_gaussian_rate_small():
    X = sample_matrix(DistributionSpec("gaussian"), 2000, 100, 2)
    Y, rate = truncate_to_lp_ball(X, 4, 3.0)
    assert rate < 0.01
    assert np.all(lp_norms(Y.rows, 4) <= 3.0 * 100 ** 0.25)


def test_truncation_calibrated_rate():
    spec = DistributionSpec("student_t", q=6)
    k1 = calibrate_kappa1(spec, 100, 3, quantile=0.99, seed=3)
    X = sample_matrix(spec, 5000, 100, 4)
    Y, rate = truncate_to_lp_ball(X, 3, k1)
    assert abs(rate - 0.01) <= 0.005
    assert np.all(lp_norms(Y.rows, 3) <= k1 * 100 ** (1 / 3))


def test_truncation_aborts_when_ball_too_small():
    X = sample_matrix(DistributionSpec("gaussian"), 50, 100, 2)
    with pytest.raises(TruncationError):
        truncate_to_lp_ball(X, 4, 0.2)


def test_truncated_spec_samples_inside():
    spec = DistributionSpec("student_t", q=6, p=3, kappa1=1.9)
    X = sample_matrix(spec, 500, 32, 5)
    assert np.all(lp_norms(X.rows, 3) <= 1.9 * 32 ** (1 / 3) + 1e-12)


def test_spec_json_roundtrip():
    spec = DistributionSpec("student_t", q=6, p=3, kappa1=2.0)
    assert DistributionSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ValueError):
        DistributionSpec.from_dict({"kind": "gaussian", "bogus": 1})


def test_tail_inversion_consistent():
    for spec in [DistributionSpec("laplace_exponential"), DistributionSpec("student_t", q=6),
                 DistributionSpec("gaussian"), DistributionSpec("sym_pareto", q=3, nu=5)]:
        for delta in [0.3, 1e-3, 1e-6]:
            y = tail_isf(spec, delta)
            assert tail_probability(spec, y) == pytest.approx(delta, rel=1e-6)


def test_laplace_moment_closed_form():
    spec = DistributionSpec("laplace_exponential")
    assert abs_moment(spec, 2) == pytest.approx(1.0)
    assert abs_moment(spec, 4) == pytest.approx(24 / 4)


def test_coupon_probability_exact_and_empirical():
    n = 6
    exact = coupon_miss_probability(n, n)
    assert exact == pytest.approx(1 - math.factorial(n) / n**n)
    hits = 0
    trials = 4000
    for t in range(trials):
        X = sample_matrix(DistributionSpec("coordinate_measure"), n, n, derive_seed(0, t)).rows
        hits += np.any(np.all(X == 0, axis=0))
    p = hits / trials
    assert abs(p - exact) <= 3 * math.sqrt(exact * (1 - exact) / trials)
