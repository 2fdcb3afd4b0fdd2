import math

import numpy as np
import pytest

from heavychain.experiments import (
    ConfigError,
    ExperimentConfig,
    SweepResult,
    reference_envelope,
    run_experiment,
    summarize,
)

GAUSS = {"kind": "gaussian"}


def cfg(**kw):
    return ExperimentConfig.from_dict(kw)


def test_envelope_examples():
    assert reference_envelope("rudelson", 100, 400 * math.log(100)) == pytest.approx(0.5)
    assert reference_envelope("alpt", 50, 50) == pytest.approx(1.0)
    n = math.e ** math.e
    assert reference_envelope("vershynin", n, 1000, q=8) == pytest.approx((n / 1000) ** 0.25)
    assert reference_envelope("sv", 10, 40, eta=1.0) == pytest.approx(0.25 ** 0.25)
    with pytest.raises(ValueError):
        reference_envelope("vershynin", 10, 20)
    with pytest.raises(ValueError):
        reference_envelope("nope", 10, 20)


@pytest.mark.parametrize("bad", [
    {"experiment": "nope"},
    {"experiment": "baiyin", "grids": {"n": [0]}},
    {"experiment": "baiyin", "grids": {"beta": [1.5]}},
    {"experiment": "baiyin", "trials": 0},
    {"experiment": "baiyin", "seed": -1},
    {"experiment": "baiyin", "output": {"format": "xml"}},
    {"experiment": "baiyin", "extra": 1},
    {"experiment": "baiyin", "distribution": {"kind": "cauchy"}},
    {"grids": {}},
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_config_roundtrip_and_missing_inputs(tmp_path):
    c = cfg(experiment="baiyin", grids={"n": [10], "beta": [0.5]}, distribution=GAUSS, trials=2, seed=3)
    assert ExperimentConfig.from_dict(c.to_dict()) == c
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(tmp_path / "bad.json")
    with pytest.raises(ConfigError):
        run_experiment(cfg(experiment="baiyin", grids={"n": [10], "beta": [0.5]}))


def test_summarize_ignores_nonfinite():
    s = summarize([1.0, 2.0, 3.0, float("nan")])
    assert s["count"] == 3 and s["median"] == 2.0
    assert summarize([])["count"] == 0


def test_sweeps_are_deterministic():
    c = cfg(experiment="baiyin", grids={"n": [8, 12], "beta": [0.5]}, distribution=GAUSS, trials=3, seed=11)
    a, b = run_experiment(c), run_experiment(c)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv() == run_experiment(c, jobs=2).to_csv()


def test_cells_do_not_depend_on_the_grid():
    both = run_experiment(cfg(experiment="baiyin", grids={"n": [8, 12], "beta": [0.5]},
                              distribution=GAUSS, trials=3, seed=5))
    alone = run_experiment(cfg(experiment="baiyin", grids={"n": [12], "beta": [0.5]},
                               distribution=GAUSS, trials=3, seed=5))
    assert np.array_equal(both.column("s_max", n=12), alone.column("s_max", n=12))


def test_csv_column_order():
    r = run_experiment(cfg(experiment="baiyin", grids={"n": [8], "beta": [0.5]}, distribution=GAUSS, trials=2))
    header = r.to_csv().splitlines()[0].split(",")
    assert header == ["n", "beta", "N", "trial", "s_max", "s_min", "c4"]


def test_theorem_b_zero_family_and_log_concavity():
    r = run_experiment(cfg(experiment="theorem_b", grids={"n": [4], "N": [20]}, distribution=GAUSS, trials=3,
                           params={"families": ["zero"], "e_trials": 100}))
    assert np.all(r.column("lhs") == 0) and r.fitted["max_ratio"] == 0
    with pytest.raises(ConfigError):
        run_experiment(cfg(experiment="theorem_b", grids={"n": [4], "N": [20]},
                           distribution={"kind": "student_t", "q": 6, "nu": 8}))


def test_symmetrization_zero_class():
    r = run_experiment(cfg(experiment="symmetrization", grids={"n": [3], "N": [10]}, distribution=GAUSS, trials=2,
                           params={"directions": [[0.0, 0.0, 0.0]], "inner_trials": 20, "d_samples": 100}))
    assert np.all(r.column("lhs") == 0) and np.all(r.column("beta_N") == 1)
    assert r.passed


def test_gamma_utility_two_points():
    r = run_experiment(cfg(experiment="gamma", params={"T": [[0, 0], [1, 0]], "beta": 2}))
    assert r.fitted["value"] == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        run_experiment(cfg(experiment="gamma"))


def test_decomposition_utility():
    from heavychain.chaining import DecompositionSpec, EtaSequence

    e1 = np.zeros((1, 6))
    e1[0, 0] = 1
    D = DecompositionSpec(e1, EtaSequence([0.0]), e1[None], [[1.0]], [[1.0]], [1.0])
    r = run_experiment(cfg(experiment="decomposition", params={"decomposition": D.to_dict()}))
    assert r.passed
    assert r.records[0]["sup_mean"] == 1.0
    with pytest.raises(ConfigError):
        run_experiment(cfg(experiment="decomposition", params={"decomposition": {"V": [[1]]}}))


def test_write_is_write_once(tmp_path):
    r = run_experiment(cfg(experiment="gamma", params={"T": [[0, 0], [1, 0]]}))
    paths = r.write(tmp_path, plot=True)
    assert set(paths) == {"summary", "records", "plot"}
    assert all(p.exists() for p in paths.values())
    with pytest.raises(FileExistsError):
        r.write(tmp_path)
    r.write(tmp_path, fmt="json", force=True)
    assert (tmp_path / "gamma.json").exists()


def test_empty_result_roundtrips():
    r = SweepResult("gamma", ["a"], ["b"])
    assert r.passed and r.to_csv() == "a,trial,b\n"
