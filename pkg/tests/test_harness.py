import json
import math
import os

import numpy as np
import pytest

from frontierlp import (
    EstimatorSpec,
    RateExperiment,
    SimulationConfig,
    benchmark_frontier,
    rate_experiment,
    replication_seed,
    run_replications,
)


def test_replication_seed_is_stable_and_index_derived():
    a = replication_seed(42, 3)
    b = replication_seed(42, 3)
    c = replication_seed(42, 4)
    d = replication_seed(43, 3)
    assert a == b
    assert len({a, c, d}) == 3


def test_estimator_spec_validation():
    with pytest.raises(ValueError):
        EstimatorSpec(kind="splines")
    with pytest.raises(ValueError):
        EstimatorSpec(kind="kernel")                  # no bandwidth
    with pytest.raises(ValueError):
        EstimatorSpec(kind="modified", h=0.1)         # no cap
    with pytest.raises(ValueError):
        EstimatorSpec(kind="fourier", harmonics=0, budget=1.0)
    with pytest.raises(ValueError):
        EstimatorSpec(kind="partition", h=0.1)        # no slices
    EstimatorSpec(kind="fourier", harmonics=3, budget=0.0)


def test_run_replications_deterministic():
    cfg = SimulationConfig(
        estimator=EstimatorSpec(kind="kernel", h=0.15),
        n=20, replications=8, kernel="epanechnikov", master_seed=99,
    )
    first = run_replications(cfg)
    second = run_replications(cfg)
    assert first.mean_delta == second.mean_delta
    assert first.std_delta == second.std_delta
    assert first.mean_np == second.mean_np
    assert first.std_np == second.std_np


def test_single_replication_has_zero_std():
    cfg = SimulationConfig(
        estimator=EstimatorSpec(kind="kernel", h=0.15),
        n=15, replications=1, master_seed=5,
    )
    report = run_replications(cfg)
    assert report.std_delta == 0.0
    assert report.std_np == 0.0
    assert report.replications_used == 1


def test_support_count_never_exceeds_sample_size():
    cfg = SimulationConfig(
        estimator=EstimatorSpec(kind="kernel", h=0.12),
        n=25, replications=12, master_seed=1,
    )
    report = run_replications(cfg)
    assert report.mean_np <= cfg.n
    assert report.mean_np < cfg.n / 2  # moderate h keeps the expansion sparse


def test_all_failures_raise():
    # a cap far below what a single weight needs makes every fit infeasible
    cfg = SimulationConfig(
        estimator=EstimatorSpec(kind="modified", h=0.1, mass_cap=1e-4),
        n=5, replications=3, master_seed=11,
    )
    with pytest.raises(RuntimeError, match="every replication failed"):
        run_replications(cfg)


def test_failures_are_counted_and_excluded():
    # cap close to the edge: some draws cover, some cannot
    cfg = SimulationConfig(
        estimator=EstimatorSpec(kind="modified", h=0.35, mass_cap=0.8),
        n=4, replications=40, master_seed=2024,
    )
    report = run_replications(cfg)
    assert 0 < report.failures < 40
    assert report.replications_used == 40 - report.failures
    assert math.isfinite(report.mean_delta)


def test_parallel_matches_serial():
    cfg = SimulationConfig(
        estimator=EstimatorSpec(kind="kernel", h=0.15),
        n=15, replications=6, master_seed=77,
    )
    serial = run_replications(cfg)
    os.environ["FRONTIER_LP_THREADS"] = "2"
    try:
        parallel = run_replications(cfg)
    finally:
        del os.environ["FRONTIER_LP_THREADS"]
    assert parallel.mean_delta == serial.mean_delta
    assert parallel.mean_np == serial.mean_np


def test_partition_and_fourier_replications_run():
    for spec in (
        EstimatorSpec(kind="partition", h=0.15, slices=6),
        EstimatorSpec(kind="fourier", budget=5.0, harmonics=4),
    ):
        report = run_replications(SimulationConfig(
            estimator=spec, n=20, replications=4, master_seed=8,
        ))
        assert report.failures == 0
        assert report.mean_delta > 0.0


def test_config_json_round_trip():
    cfg = SimulationConfig(
        estimator=EstimatorSpec(kind="modified", h=0.2, mass_cap=1.0),
        n=30, replications=7, kernel="biweight", master_seed=123, grid=12_345,
    )
    data = json.loads(json.dumps(cfg.to_dict()))
    back = SimulationConfig.from_dict(data)
    assert back == cfg
    assert data["estimator"]["C_alpha"] == 1.0
    assert data["frontier"] == "benchmark"

    custom = SimulationConfig(
        estimator=EstimatorSpec(kind="kernel", h=0.1),
        n=5, replications=2,
        frontier=benchmark_frontier(),
        master_seed=0,
    )
    assert SimulationConfig.from_dict(json.loads(json.dumps(custom.to_dict()))) == custom


def test_report_table_mirrors_study_columns():
    cfg = SimulationConfig(
        estimator=EstimatorSpec(kind="kernel", h=0.14),
        n=15, replications=3, master_seed=4,
    )
    table = run_replications(cfg).table()
    header, row = table.splitlines()
    assert "mean(delta_N)" in header
    assert "st-dev(delta_N)" in header
    assert "mean(np)" in header
    assert "st-dev(np)" in header
    assert row.startswith("kernel")
    assert "0.140" in row


def test_rate_bandwidth_rules():
    # third-power rule pairs with the capped fit (schedule exponent 1)
    exp = RateExperiment(
        estimator=EstimatorSpec(kind="modified", h=0.1, mass_cap=1.0),
        n_grid=(50, 100, 200),
        h_rule="third",
        master_seed=1,
    )
    filled = rate_experiment(exp, reps=1)
    assert filled.h_values[1] == pytest.approx((math.log(100) / 100) ** (1 / 3))
    assert filled.h_values[1] == pytest.approx(0.3583, abs=1e-3)
    # with the matched rule the schedule collapses onto the bandwidth
    assert filled.schedule_values == pytest.approx(filled.h_values)

    # quarter-power rule pairs with the base fit (schedule exponent 2)
    quarter = rate_experiment(
        RateExperiment(
            estimator=EstimatorSpec(kind="kernel", h=0.1),
            n_grid=(50, 100, 200), h_rule="quarter", master_seed=1,
        ),
        reps=1,
    )
    assert quarter.h_values[1] == pytest.approx((math.log(100) / 100) ** 0.25)
    assert quarter.schedule_values == pytest.approx(quarter.h_values)


def test_rate_experiment_validation():
    spec = EstimatorSpec(kind="kernel", h=0.1)
    with pytest.raises(ValueError):
        RateExperiment(estimator=spec, n_grid=(50, 100))          # too short
    with pytest.raises(ValueError):
        RateExperiment(estimator=spec, n_grid=(100, 50, 200))     # not increasing
    with pytest.raises(ValueError):
        RateExperiment(estimator=spec, n_grid=(50, 100, 200), h_rule="half")
    with pytest.raises(ValueError):
        RateExperiment(estimator=spec, n_grid=(50, 100, 200), h_rule="fixed")
    with pytest.raises(ValueError):
        RateExperiment(
            estimator=EstimatorSpec(kind="fourier", budget=5.0, harmonics=4),
            n_grid=(50, 100, 200),
        )


def test_small_rate_experiment_fills_fields():
    exp = RateExperiment(
        estimator=EstimatorSpec(kind="kernel", h=0.1),
        n_grid=(30, 60, 120),
        h_rule="quarter",
        master_seed=10,
    )
    filled = rate_experiment(exp, reps=4)
    assert len(filled.mean_errors) == 3
    assert all(math.isfinite(v) for v in filled.mean_errors)
    assert filled.cell_failures == (0, 0, 0)
    assert math.isfinite(filled.slope)
    data = json.loads(json.dumps(filled.to_dict()))
    back = RateExperiment.from_dict(data)
    assert back.n_grid == exp.n_grid
    assert back.h_rule == "quarter"
