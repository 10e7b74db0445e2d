import json
import math
import statistics

import pytest

import ssorl


def tiny_config(**overrides):
    cfg = {
        "name": "py-smoke",
        "env": {"id": "pointmass"},
        "data": {"n_trajectories": 30},
        "split": {"protocol": "coupled", "q": 50, "label_frac": 0.2},
        "idm": {"hidden": [8], "budget": 20, "eval_every": 10, "batch_size": 32},
        "trainer": {"algorithm": "td3bc", "actor_hidden": [8], "critic_hidden": [8],
                    "budget": 20, "batch_size": 16, "log_every": 10},
        "seeds": [0, 1],
        "eval_episodes": 2,
        "stats": {"reps": 200},
    }
    cfg.update(overrides)
    return cfg


def test_statistics_match_python():
    values = [0.3, 0.9, 0.1, 0.5, 0.7, 0.2, 0.8, 0.4]
    assert ssorl.mean(values) == pytest.approx(statistics.fmean(values))
    # n = 8: middle four order statistics
    assert ssorl.iqm(values) == pytest.approx(statistics.fmean(sorted(values)[2:6]))
    assert ssorl.relative_performance_gap(1.0, 0.8) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        ssorl.relative_performance_gap(0.0, 0.5)


def test_bootstrap_is_deterministic():
    scores = [[0.1, 0.5, 0.9], [0.2, 0.4, 0.6]]
    a = ssorl.bootstrap_ci(scores, reps=500, seed=3)
    b = ssorl.bootstrap_ci(scores, reps=500, seed=3)
    assert a == b
    assert a["lower"] <= a["point"] <= a["upper"]


def test_self_training_helpers():
    assert ssorl.mixture_variance([[0.0], [2.0]], [[1.0], [1.0]]) == [2.0]
    sizes = ssorl.augmentation_schedule(100, 5)
    assert [100 - sum(sizes[: i + 1]) for i in range(5)] == [80, 60, 40, 20, 0]


def test_finite_grid_markov_posterior_is_local():
    out = ssorl.finite_grid_posteriors([4, 5, 2, 1], t=1)
    assert max(abs(e - l) for e, l in zip(out["exact"], out["local"])) < 1e-12
    assert math.isclose(sum(out["exact"]), 1.0)


def test_dataset_and_split(tmp_path):
    path = tmp_path / "ds.bin"
    info = ssorl.generate_dataset(tiny_config(), seed=0, path=str(path))
    assert info["n_trajectories"] == 30
    assert ssorl.load_dataset(str(path))["returns"] == info["returns"]
    lab, unl = ssorl.coupled_split(str(path), 50, 0.2, seed=1)
    assert len(lab) == 6 and len(unl) == 24
    assert not set(lab) & set(unl)


def test_pipeline_and_report(tmp_path):
    report = ssorl.run_pipeline(tiny_config())
    assert report["kind"] == "run"
    assert len(report["rows"]) == 2
    assert report == ssorl.run_pipeline(tiny_config())
    files = ssorl.emit_report([report], "json,csv", str(tmp_path))
    assert len(files) == 3
    with open(files[0]) as fh:
        assert json.load(fh) == report


def test_stage_errors_surface():
    cfg = tiny_config(split={"protocol": "coupled", "q": 5, "label_frac": 0.2})
    with pytest.raises(ssorl.StageError, match="split"):
        ssorl.run_pipeline(cfg)
