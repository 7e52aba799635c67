import json
import math

import numpy as np
import pytest

from middev import harness
from middev.errors import AllReplicasDegenerate, ConfigError, ZeroDenominator
from middev.params import Case, ModelConfig, Scale


def _cfg(kind, case=Case.I, n=2000, replicas=200, delta=0.3, **kw):
    model = ModelConfig(case, -1.0, -1.0, delta, n=n)
    return harness.ExperimentConfig(model, replicas, 42, kind, **kw)


def test_concentration_targets_unit_model():
    t1 = harness.concentration_targets(Case.I, -1.0, -1.0, 1.0)
    assert t1 == {"S": 0.25, "P": 0.25, "T": 0.5, "Q": 0.25, "J": 0.25, "H": 0.5}
    t2 = harness.concentration_targets(Case.II, -1.0, -1.0, 1.0)
    assert t2 == {"S": 0.25, "P": 0.0, "T": 0.5, "Q": 0.25, "J": 0.25, "H": 0.5}


def test_variance_targets_unit_model():
    assert harness.variance_targets(Case.I, -1.0, -1.0) == {
        "var_theta": 1.0, "var_rho": 4.0, "cov_theta_rho": 0.0, "var_d": 16.0}
    assert harness.variance_targets(Case.II, -1.0, -1.0) == {
        "var_theta": 1.0, "var_rho": 1.0, "corr_theta_rho": -1.0, "var_d": 4.0}


def test_replica_seeds_are_distinct_and_keyed():
    seeds = {harness.replica_seed(7, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert harness.replica_seed(7, 0) == 7
    assert harness.replica_seed(7, 3) & ((1 << 64) - 1) == 7


def test_tail_slopes_gaussian_oracle():
    rng = np.random.default_rng(0)
    z = rng.standard_normal(400_000)
    a = 1.5
    rows = harness.tail_slopes(z / a, a, [1.0, 1.5], lambda x: x * x / 2)
    for row, x in zip(rows, (1.0, 1.5)):
        p = math.erfc(x * a / math.sqrt(2))
        assert row["p_hat"] == pytest.approx(p, rel=0.05)
        assert row["slope"] == pytest.approx(-math.log(p) / a**2, rel=0.02)
        assert row["rate_prediction"] == x * x / 2
        assert not row["lower_bound_flag"]


def test_tail_slopes_censored():
    (row,) = harness.tail_slopes(np.zeros(100), 2.0, [1.0], lambda x: x)
    assert row["lower_bound_flag"] and row["count"] == 0
    assert row["slope"] == pytest.approx(math.log(100) / 4)


def test_replicate_marks_degenerate_rows():
    def fn(i):
        if i % 3 == 0:
            raise ZeroDenominator("theta")
        return [float(i)]

    vals, bad = harness._replicate(fn, 9, 1, threads=4)
    assert bad.tolist() == [i % 3 == 0 for i in range(9)]
    assert np.isnan(vals[0, 0]) and vals[4, 0] == 4.0

    def always(i):
        raise ZeroDenominator("rho")

    with pytest.raises(AllReplicasDegenerate):
        harness._replicate(always, 5, 1, threads=1)


@pytest.mark.parametrize("kind", list(harness.Experiment))
def test_thread_count_does_not_change_results(kind, tmp_path):
    extra = {"n_grid": (200, 400)} if kind is harness.Experiment.TRUNCATION else {}
    cfg = _cfg(kind, n=400, replicas=120, **extra)
    a = harness.run(cfg, threads=1, out_dir=tmp_path / "a")
    b = harness.run(cfg, threads=8, out_dir=tmp_path / "b")
    assert a.to_json() == b.to_json()
    for name in ("json", "csv"):
        stem = kind.value.lower()
        assert (tmp_path / "a" / f"{stem}.{name}").read_bytes() == (tmp_path / "b" / f"{stem}.{name}").read_bytes()


def test_concentration_small_run_near_targets():
    res = harness.run(_cfg(harness.Experiment.CONCENTRATION, case=Case.II, n=20_000, replicas=100))
    for name in ("S", "T", "Q", "J"):
        s = res.stat(name)
        assert s["rel_error"] < 0.15, s
    assert abs(res.stat("P")["estimate"]) < 0.05
    assert res.stat("S")["replicas_used"] == 100


def test_variance_match_needs_replicas():
    with pytest.raises(ConfigError):
        harness.run(_cfg(harness.Experiment.VARIANCE_MATCH, replicas=50))


def test_variance_match_case2_correlation():
    res = harness.run(_cfg(harness.Experiment.VARIANCE_MATCH, case=Case.II, n=5000, replicas=300))
    assert res.stat("corr_theta_rho")["estimate"] < -0.9
    assert {s["name"] for s in res.statistics} >= {"var_theta", "var_rho", "var_d", "mean_z_theta"}


def test_bercu_touati_small_run():
    res = harness.run(_cfg(harness.Experiment.BERCU_TOUATI, n=500, replicas=2000))
    assert len(res.statistics) == 9
    assert res.extras["pointwise_violations"] == 0
    assert res.extras["all_cells_passed"]


def test_config_validation_and_round_trip():
    cfg = _cfg("tail-slope", statistic="rho", thresholds=(0.25, 0.75))
    assert cfg.experiment is harness.Experiment.TAIL_SLOPE
    again = harness.ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg and again.content_hash() == cfg.content_hash()
    assert len(cfg.content_hash()) == 40
    for bad in (dict(replicas=0), dict(master_seed=2**64), dict(statistic="phi"),
                dict(thresholds=(0.0,)), dict(n_grid=(10, 10)), dict(r=-1.0)):
        base = dict(model=cfg.model, replicas=10, master_seed=1, experiment="Concentration")
        base.update(bad)
        with pytest.raises(ConfigError):
            harness.ExperimentConfig(**base)
    with pytest.raises(ConfigError):
        harness.Experiment.parse("nonsense")
    with pytest.raises(ConfigError):
        harness.ExperimentConfig.from_dict({"model": cfg.model.to_dict()})


def test_result_serialisation(tmp_path):
    cfg = _cfg(harness.Experiment.TAIL_SLOPE, n=500, replicas=50,
               thresholds=(0.5, 50.0))
    cfg = harness.ExperimentConfig(
        ModelConfig(Case.I, -1.0, -1.0, 0.3, scale=Scale.sqrt_log(), n=500), 50, 3, "TailSlope",
        thresholds=(0.5, 50.0),
    )
    res = harness.run(cfg, threads=2)
    assert res.thresholds[1]["lower_bound_flag"]
    back = harness.ExperimentResult.from_dict(json.loads(res.to_json()))
    assert back.to_json() == res.to_json()
    paths = harness.write_result(res, tmp_path, "csv")
    assert [p.name for p in paths] == ["tailslope.csv"]
    header = paths[0].read_text().splitlines()[0].split(",")
    assert header[:2] == ["kind", "name"] and "lower_bound_flag" in header
