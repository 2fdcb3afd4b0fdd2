import math

import numpy as np
import pytest

from heavychain.chaining import EtaInvariantError, EtaSequence, PhiFamily, make_eta, phi_aggregates, phi_eval, s0_and_ells


def test_standard_schedule():
    eta = make_eta("standard", N=100)
    assert eta.values[:5].tolist() == [0, 2, 4, 8, 16]
    assert eta.values[-1] > 100 >= eta.values[-2]
    r = eta.values[2:] / eta.values[1:-1]
    assert np.all((1.1 <= r) & (r <= 10))
    assert not [v for v in eta.violations() if v.which == "ratio"]


def test_ball_schedule_value():
    eta = make_eta("ball", n=64, s1=2, kappa4=10, N=64)
    assert eta[0] == pytest.approx(10 * 4 * math.log(16 * math.e), rel=1e-12)
    assert eta[0] == pytest.approx(150.9, abs=0.05)
    assert eta.kind == "ball" and eta.params["kappa4"] == 10


def test_ball_requires_kappa4_floor():
    with pytest.raises(ValueError):
        make_eta("ball", n=64, s1=2, kappa4=5, N=64)


def test_ratio_violation_names_level():
    eta = EtaSequence([0, 2, 50, 60])
    bad = [v for v in eta.violations() if v.which == "ratio"]
    assert bad[0].s == 1 and bad[0].lhs == 25


def test_ball_product_violations_are_recorded():
    eta = make_eta("ball", n=256, s1=2, kappa4=10, N=256)
    assert all(v["which"] == "product" for v in eta.params["violations"])
    r = eta.values[2:] / eta.values[1:-1]
    assert np.all((1.1 <= r) & (r <= 10))


def test_eta_serialization():
    eta = make_eta("standard", N=10)
    assert EtaSequence.from_dict(eta.to_dict()).values.tolist() == eta.values.tolist()
    with pytest.raises(ValueError):
        EtaSequence([3, 1])


def test_s0_and_ells_examples():
    eta = make_eta("standard", N=8)
    s0, ells = s0_and_ells(eta, 8)
    assert s0 == 2
    assert ells[3] == 8
    assert ells[0] == 1 and ells[1] == 1
    N = 50
    s0, ells = s0_and_ells([0.0, N * math.log(math.e * N) / N * N], N)
    assert ells[1] == N


def test_ells_scan_definition():
    N = 40
    eta = make_eta("standard", N=N)
    s0, ells = s0_and_ells(eta, N)
    for s, e in enumerate(eta):
        if e < math.log(math.e * N):
            assert ells[s] == 1
        else:
            ok = [l for l in range(1, N + 1) if l * math.log(math.e * N / l) <= e]
            assert ells[s] == max(ok)


def test_phi_values():
    N = 37
    for beta in (0.5, 1, 2):
        assert phi_eval(PhiFamily.beta_family(beta, N), N) == pytest.approx(math.sqrt(N))
    assert phi_eval(PhiFamily.lq_family(5, N, 0.2), N) == pytest.approx(math.sqrt(N))
    assert phi_eval(PhiFamily.beta_family(1, 1), 1) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        phi_eval(PhiFamily.beta_family(1, 10), 11)
    with pytest.raises(ValueError):
        PhiFamily.lq_family(4, 10, eps=1.0)


def test_phi_aggregates():
    f = PhiFamily.lq_family(8, 256, 0.0)
    Phi, Phi_s = phi_aggregates(f, make_eta("standard", N=256))
    assert Phi <= (1 - 4 / 8) ** -0.5 * 16
    finite = Phi_s[np.isfinite(Phi_s)]
    assert np.all(finite <= Phi + 1e-12)
    assert Phi_s[0] == pytest.approx(Phi)
    i = np.arange(1, 257)
    w = f.values(i) ** 2 / i
    assert Phi == pytest.approx(math.sqrt(np.sum(w**2)))
    one = PhiFamily.lq_family(8, 1, 0.0)
    Phi1, _ = phi_aggregates(one, [0.0])
    assert Phi1 == pytest.approx(1.0)


def test_Phi_s_direct_sum():
    f = PhiFamily.beta_family(1.0, 30)
    _, Phi_s = phi_aggregates(f, [0.0, 2.0, 4.0, 8.0, 16.0, 32.0])
    for s, e in enumerate([0.0, 2.0, 4.0, 8.0, 16.0]):
        tot = sum(f(e + i) ** 2 / (e + i) * f(i) ** 2 / i for i in range(1, 30 - int(math.ceil(e)) + 1))
        assert Phi_s[s] == pytest.approx(math.sqrt(tot))
    assert math.isnan(Phi_s[-1])
