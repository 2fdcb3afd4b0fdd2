import math

import numpy as np
import pytest
from oracles import decomposition_bruteforce

from heavychain.chaining import (
    DecompositionSpec,
    EtaSequence,
    PhiFamily,
    bernoulli_rhs,
    decomposition_params,
    greedy_admissible,
    make_eta,
    verify_decomposition,
)


def _e1(N, alpha=1.0):
    e1 = np.zeros((1, N))
    e1[0, 0] = 1.0
    return DecompositionSpec(e1, EtaSequence([0.0]), e1[None], [[1.0]], [[1.0]], [1.0], alpha=alpha)


def test_unit_vector_decomposition_holds():
    D = _e1(8)
    rep = verify_decomposition(D, PhiFamily.beta_family(2.0, 8))
    assert rep.holds
    assert D.gamma == 1.0 and D.d == 1.0


def test_zero_alpha_fails_at_first_subset():
    rep = verify_decomposition(_e1(8, alpha=0.0), PhiFamily.beta_family(2.0, 8))
    assert not rep.holds
    assert rep.first_violation["level"] == "condition2"
    assert rep.first_violation["k"] == 1
    assert rep.first_violation["lhs"] == 1.0 and rep.first_violation["rhs"] == 0.0


def _random_instance(rng, N):
    m = int(rng.integers(1, 6))
    V = rng.standard_normal((m, N)) * rng.uniform(0.2, 2.0)
    A = greedy_admissible(V, eta=make_eta("standard", N=N))
    theta = rng.uniform(0.0, 2.0, size=(A.n_levels, m))
    D = DecompositionSpec.from_admissible(A, theta, lambda v: float(np.max(np.abs(v))),
                                          alpha=float(rng.uniform(0.5, 2.0)))
    return D


@pytest.mark.parametrize("seed", range(12))
def test_matches_subset_bruteforce(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(2, 9))
    D = _random_instance(rng, N)
    f = PhiFamily.beta_family(float(rng.choice([1.0, 2.0])), N)
    rep = verify_decomposition(D, f)
    holds, slack = decomposition_bruteforce(
        D.V, [D.increments(s) for s in range(D.n_levels)], D.theta, D.inc_norms, D.norms,
        D.alpha, D.gamma, D.eta.values, f, N)
    assert rep.holds == holds
    assert rep.info["min_slack"] == pytest.approx(slack, abs=1e-9)


def test_A1_example():
    N = 8
    V = np.zeros((1, N))
    V[0, :2] = 1.0
    pts = np.stack([np.zeros((1, N)), V])
    D = DecompositionSpec(V, EtaSequence([0.0, 2.0]), pts, [[0.0], [1.0]], [[0.0], [1.0]], [1.0])
    P = decomposition_params(D, PhiFamily.beta_family(1.0, N))
    assert P.A1 == pytest.approx(math.sqrt(2) * math.log(4 * math.e))
    assert P.A2 == pytest.approx(2 * math.log(4 * math.e) ** 2)
    assert P.B4 == pytest.approx(math.sqrt(2))


def test_zero_increments_give_zero_params():
    N = 6
    V = np.zeros((2, N))
    D = DecompositionSpec(V, make_eta("standard", N=N), np.zeros((2, 2, N)), np.zeros((2, 2)),
                          np.zeros((2, 2)), np.zeros(2))
    P = decomposition_params(D, PhiFamily.lq_family(3.0, N, 0.1))
    assert (P.A1, P.A2, P.A_Phi, P.B4, P.B_qe) == (0.0, 0.0, 0.0, 0.0, 0.0)
    for mode in ("full", "compact"):
        assert bernoulli_rhs(D, PhiFamily.lq_family(3.0, N, 0.1), mode=mode).value == 0.0


def test_compact_forms_and_mismatch():
    D = _e1(8)
    beta = PhiFamily.beta_family(2.0, 8)
    heavy = PhiFamily.lq_family(3.0, 8, 0.1)
    b = bernoulli_rhs(D, beta, r=2.0, mode="compact")
    P = decomposition_params(D, beta)
    assert b.value == pytest.approx(2.0 * (1 + math.sqrt(8) * (1 + P.B4)))
    with pytest.raises(ValueError):
        bernoulli_rhs(D, heavy, mode="compact_beta")
    with pytest.raises(ValueError):
        bernoulli_rhs(D, beta, mode="compact_lq")
    with pytest.raises(ValueError):
        bernoulli_rhs(D, beta, mode="bogus")
    full = bernoulli_rhs(D, beta)
    assert full.value == pytest.approx(1 * (1 + float(beta.values(8.0)) + P.A1) + P.A2 + P.A_Phi)


def test_json_roundtrip():
    D = _random_instance(np.random.default_rng(7), 5)
    E = DecompositionSpec.from_json(D.to_json())
    assert np.array_equal(E.points, D.points)
    assert E.gamma == D.gamma and E.alpha == D.alpha
    f = PhiFamily.beta_family(2.0, 5)
    assert verify_decomposition(E, f).info["min_slack"] == verify_decomposition(D, f).info["min_slack"]


def test_rejects_negative_theta():
    with pytest.raises(ValueError):
        DecompositionSpec(np.ones((1, 2)), EtaSequence([0.0]), np.ones((1, 1, 2)), [[-1.0]], [[1.0]], [1.0])
