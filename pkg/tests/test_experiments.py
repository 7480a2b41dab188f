import io
import math

import numpy as np
import pytest

from ergograph.errors import InvalidParameterError
from ergograph.experiments import (
    ExperimentConfig,
    gmrf_field_demo,
    gmrf_mse_sweep,
    run_experiment,
    select_node,
)


def test_select_node_examples():
    n = 4
    assert select_node(np.full(n, 0.5)) == 0  # nothing strictly below 1/sqrt(N): argmin
    assert select_node([0.1, 0.45, 0.3, 0.8]) == 1
    assert select_node([0.2, 0.2, 0.9, 0.3]) == 3
    v = np.array([0.6, 0.6, 0.4, 0.35])
    assert v[select_node(v)] < 1 / math.sqrt(4)


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(family="lattice", sizes=[10])
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(family="er", sizes=[])
    with pytest.raises(InvalidParameterError):
        ExperimentConfig.from_dict({"family": "er", "sizes": [10], "bogus": 1})
    cfg = ExperimentConfig.from_json('{"family": "er", "sizes": [10], "epsilon": "snr"}')
    assert cfg.epsilon_value == pytest.approx(1.0)


@pytest.fixture(scope="module")
def small_er():
    cfg = ExperimentConfig(family="er", sizes=[10, 20], graphs_per_size=3, trials_per_graph=400, epsilon=0.5, master_seed=7)
    return cfg, run_experiment(cfg)


def test_determinism(small_er):
    cfg, rep = small_er
    again = run_experiment(cfg, threads=2)
    a = [(p.size, p.graph_index, p.estimator, p.err_prob, p.mse) for p in rep.points]
    b = [(p.size, p.graph_index, p.estimator, p.err_prob, p.mse) for p in again.points]
    assert a == b


def test_sizes_are_independent_streams(small_er):
    cfg, rep = small_er
    alone = run_experiment(ExperimentConfig(**{**cfg.__dict__, "sizes": [20]}))
    ref = [p.err_prob for p in rep.points if p.size == 20]
    assert [p.err_prob for p in alone.points] == ref


def test_aggregates_ordered(small_er):
    _, rep = small_er
    for a in rep.aggregates:
        assert a.err_prob_min <= a.err_prob_mean <= a.err_prob_max
        assert a.bound_min <= a.bound_mean <= a.bound_max
    assert len(rep.points) == 2 * 3 * 2


def test_points_within_bounds(small_er):
    _, rep = small_er
    for p in rep.points:
        assert p.bound_clipped == min(p.bound_raw, 1.0)
        assert p.err_prob <= p.bound_clipped + 4 * math.sqrt(max(p.bound_clipped * (1 - p.bound_clipped), 1e-12) / p.trials)
        assert abs(p.mse - p.mse_analytic) <= 5 * p.mse_se + 1e-12


def test_report_csv(small_er):
    _, rep = small_er
    buf = io.StringIO()
    rep.write_csv(buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "family,N,estimator,err_prob_mean,err_prob_min,err_prob_max,bound_mean,bound_min,bound_max,mse_mean,seed"
    assert len(lines) == 1 + 4
    assert lines[1].endswith(",7")


def test_sbm_runs():
    cfg = ExperimentConfig(family="sbm", sizes=[16], graphs_per_size=2, trials_per_graph=200, master_seed=3)
    rep = run_experiment(cfg)
    assert not rep.failures
    assert len(rep.aggregates) == 2


def test_gmrf_demo_noiseless():
    demo = gmrf_field_demo(50, seed=1, noiseless=True)
    assert demo.rel_err_raw <= 1e-12
    assert demo.rel_err_avg <= 1e-10


def test_gmrf_demo_shapes_and_csv():
    demo = gmrf_field_demo(30, seed=2)
    assert demo.positions.shape == (30, 2)
    buf = io.StringIO()
    demo.write_csv(buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "node,x,y,raw,shift_average,true_mean"
    assert len(lines) == 31
    with pytest.raises(InvalidParameterError):
        gmrf_field_demo(5, seed=0)


def test_gmrf_mse_sweep_trend():
    cfg = ExperimentConfig(family="gmrf", sizes=[20], graphs_per_size=10, trials_per_graph=300, master_seed=4)
    rows = gmrf_mse_sweep([20, 80], cfg)
    assert rows[1]["mse_mean"] < rows[0]["mse_mean"]
    # empirical vs analytic at N=20
    pts = rows[0]["points"]
    se = math.sqrt(sum(p.mse_se**2 for p in pts)) / len(pts)
    assert abs(rows[0]["mse_mean"] - rows[0]["mse_analytic_mean"]) <= 3 * se
