import io

import numpy as np
import pytest

from ergograph import graphs
from ergograph.distributed import simulate_diffusion
from ergograph.estimators import graph_shift_average
from ergograph.spectral import decompose


def _setup(g):
    s = graphs.default_shift(g)
    return s, decompose(s)


def test_single_round_sends_nothing():
    g = graphs.erdos_renyi(8, 0.5, np.random.default_rng(0))
    s, d = _setup(g)
    x = np.arange(8.0)
    tr = simulate_diffusion(g, s, d.lambda1, x, 1)
    assert tr.messages_sent == 0 and tr.rounds == 0
    np.testing.assert_array_equal(tr.per_node_estimates, x)


def test_cycle_six():
    g = graphs.directed_cycle(6)
    s, d = _setup(g)
    x = np.array([1.0, 4.0, -2.0, 0.5, 3.0, 7.0])
    tr = simulate_diffusion(g, s, d.lambda1, x, 6)
    assert tr.messages_sent == 30
    np.testing.assert_allclose(tr.per_node_estimates, x.mean(), atol=1e-12)


def test_er_matches_centralized():
    g = graphs.erdos_renyi(20, 0.3, np.random.default_rng(1))
    s, d = _setup(g)
    x = np.random.default_rng(2).standard_normal(20)
    tr = simulate_diffusion(g, s, d.lambda1, x, 20)
    ref = graph_shift_average(s, d.lambda1, x, 20)
    assert np.abs(tr.per_node_estimates - ref).max() <= 1e-12 * np.abs(ref).max()
    assert tr.messages_sent == 19 * g.n_directed_edges


def test_covariance_shift_self_weights():
    # sample covariance has a diagonal: applied locally, never messaged
    g = graphs.covariance_graph(6, 60, np.random.default_rng(3))
    s, d = _setup(g)
    x = np.random.default_rng(4).standard_normal(6)
    tr = simulate_diffusion(g, s, d.lambda1, x, 4)
    ref = graph_shift_average(s, d.lambda1, x, 4)
    assert np.abs(tr.per_node_estimates - ref).max() <= 1e-12 * np.abs(ref).max()
    assert tr.messages_sent == 3 * g.n_directed_edges


def test_trace_is_reproducible_and_dumps_csv():
    g = graphs.sbm(12, 3, 0.8, 0.2, np.random.default_rng(5))
    s, d = _setup(g)
    x = np.random.default_rng(6).standard_normal(12)
    a = simulate_diffusion(g, s, d.lambda1, x, 5, record=True)
    b = simulate_diffusion(g, s, d.lambda1, x, 5, record=True)
    np.testing.assert_array_equal(a.per_node_estimates, b.per_node_estimates)
    buf = io.StringIO()
    a.write_csv(buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "round,node,current"
    assert len(lines) == 1 + 5 * 12
    # round 0 is the raw signal at node 1
    assert float(lines[1].split(",")[2]) == x[0]


def test_dimension_mismatch():
    g = graphs.directed_cycle(4)
    s, d = _setup(g)
    with pytest.raises(ValueError):
        simulate_diffusion(g, s, d.lambda1, np.ones(3), 2)
