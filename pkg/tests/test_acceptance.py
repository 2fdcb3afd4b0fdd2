"""Acceptance criteria at their pinned tolerances, one PASS/FAIL line each.

Run alone with ``pytest -m acceptance -s`` (the lines are printed either way).
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from oracles import decomposition_bruteforce, power_method_extremes

from heavychain.chaining import (
    DecompositionSpec,
    PhiFamily,
    gamma_beta_bruteforce,
    gamma_beta_value,
    greedy_admissible,
    make_eta,
    verify_decomposition,
)
from heavychain.experiments import ExperimentConfig, run_experiment
from heavychain.linalg import extreme_singulars

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _run(name):
    return run_experiment(ExperimentConfig.from_json(CONFIGS / name))


def _report(capsys, number, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} -- {detail} [{elapsed:.1f}s, budget {budget}s]")
    assert ok, detail


def test_criterion_1_gaussian_edges(capsys):
    t0 = time.perf_counter()
    c = _run("baiyin_gaussian.json").cells[0]
    hi, lo = c["s_max"]["median"], c["s_min"]["median"]
    ok = abs(hi - 1.5) <= 0.06 and abs(lo - 0.5) <= 0.06
    _report(capsys, 1, ok, f"median s_max/sqrt(N)={hi:.4f} (1.5+-0.06), s_min/sqrt(N)={lo:.4f} (0.5+-0.06)",
            time.perf_counter() - t0, 60)


def test_criterion_2_heavy_tail_stability(capsys):
    t0 = time.perf_counter()
    res = _run("baiyin_student_t.json")
    c4 = {c["n"]: c["fitted_c4"] for c in res.cells}
    ok = c4[400] <= c4[100] + 0.1 and c4[400] <= 3
    _report(capsys, 2, ok, "fitted c4 " + ", ".join(f"n={n}: {v:.4f}" for n, v in sorted(c4.items())),
            time.perf_counter() - t0, 180)


def test_criterion_3_coupon_control(capsys):
    t0 = time.perf_counter()
    frac = _run("coupon.json").cells[0]["frac_deviation_ge_1"]
    _report(capsys, 3, frac >= 0.99, f"fraction of trials with deviation >= 1: {frac:.3f} (need >= 0.99)",
            time.perf_counter() - t0, 10)


def test_criterion_4_oracle_equivalences(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    # (a) singular values against power iteration
    worst = 0.0
    for _ in range(100):
        A = rng.standard_normal((12, 5))
        ours = extreme_singulars(A)
        ref = power_method_extremes(A)
        worst = max(worst, abs(ours.s_min - ref[0]), abs(ours.s_max - ref[1]))
    ok_a = worst <= 1e-6
    # (b) top-k reduction against subset enumeration
    agree, held = 0, 0
    for _ in range(100):
        N = int(rng.integers(1, 13))
        m = int(rng.integers(1, 5))
        V = rng.standard_normal((m, N)) * rng.uniform(0.2, 2.0)
        A = greedy_admissible(V, eta=make_eta("standard", N=max(N, 2)))
        theta = rng.uniform(0.0, 2.0, size=(A.n_levels, m))
        D = DecompositionSpec.from_admissible(A, theta, lambda v: float(np.max(np.abs(v))),
                                              alpha=float(rng.uniform(0.5, 2.5)))
        f = PhiFamily.beta_family(float(rng.choice([1.0, 2.0])), N)
        rep = verify_decomposition(D, f)
        holds, slack = decomposition_bruteforce(
            D.V, [D.increments(s) for s in range(D.n_levels)], D.theta, D.inc_norms, D.norms,
            D.alpha, D.gamma, D.eta.values, f, N)
        agree += rep.holds == holds and abs(rep.info["min_slack"] - slack) <= 1e-9 * max(1.0, abs(slack))
        held += holds
    ok_b = agree == 100
    # (c) greedy gamma against brute force
    dominated = sum(
        gamma_beta_value(greedy_admissible(T), 2.0) >= gamma_beta_bruteforce(T, beta=2.0) - 1e-12
        for T in (rng.standard_normal((5, 3)) for _ in range(100)))
    equal = sum(
        abs(gamma_beta_value(greedy_admissible(T), b) - gamma_beta_bruteforce(T, beta=b)) <= 1e-12
        for T in (rng.standard_normal((2, 3)) for _ in range(50)) for b in (1.0, 2.0))
    ok_c = dominated == 100 and equal == 100
    _report(capsys, 4, ok_a and ok_b and ok_c,
            f"(a) max |singular - power method|={worst:.2e}; (b) {agree}/100 agree ({held} holding); "
            f"(c) greedy >= exact {dominated}/100, two-point equal {equal}/100",
            time.perf_counter() - t0, 60)


def test_criterion_5_tail_lemma(capsys):
    t0 = time.perf_counter()
    res = _run("tail_lemma.json")
    rate = res.fitted["max_rate"]
    _report(capsys, 5, rate <= 0.01, f"violation rate {rate:.4f} over {res.meta['trials']} trials (need <= 0.01)",
            time.perf_counter() - t0, 60)


def test_criterion_6_omega_events(capsys):
    t0 = time.perf_counter()
    c = _run("omega_events.json").cells[0]
    ok = c["prob_all"] >= 0.9 and c["conclusions_failed"] == 0
    _report(capsys, 6, ok, f"Pr(all three events)={c['prob_all']:.3f} (need >= 0.9), "
                           f"conclusions failed on {c['conclusions_failed']} resamples",
            time.perf_counter() - t0, 300)


def test_criterion_7_theorem_b(capsys):
    t0 = time.perf_counter()
    res = _run("theorem_b.json")
    r = res.fitted["max_ratio"]
    _report(capsys, 7, r <= 5, f"max ratio LHS/(E/sqrt(N)+E^2/N)={r:.4f} (need <= 5)",
            time.perf_counter() - t0, 300)


def test_criterion_8_symmetrization(capsys):
    t0 = time.perf_counter()
    c = _run("symmetrization.json").cells[0]
    _report(capsys, 8, c["holds_count"] == 50,
            f"inequality holds in {c['holds_count']}/50 repetitions at x={c['x']:.3f}",
            time.perf_counter() - t0, 60)


def test_criterion_9_weak_lp_slope(capsys):
    t0 = time.perf_counter()
    res = _run("weak_lp_tail.json")
    slope = res.fitted["slope"]
    probs = ", ".join(f"n={c['n']}: {c['probability']:.4f}" for c in res.cells)
    ok = math.isfinite(slope) and abs(slope - (-1.0)) <= 0.3
    _report(capsys, 9, ok, f"log-log slope {slope:.3f} (need -1 +- 0.3); probabilities {probs}",
            time.perf_counter() - t0, 180)


def test_criterion_10_property_suites(capsys):
    t0 = time.perf_counter()
    here = Path(__file__).resolve().parent
    suites = ["test_properties.py", "test_eta_phi.py", "test_norms.py", "test_tails_theta.py",
              "test_processes.py", "test_decomposition.py"]
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           *[str(here / s) for s in suites]], capture_output=True, text=True, cwd=here.parent)
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    _report(capsys, 10, proc.returncode == 0, f"property and invariant suites: {summary}",
            time.perf_counter() - t0, 120)
