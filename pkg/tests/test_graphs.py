import math

import numpy as np
import pytest

from ergograph import graphs
from ergograph.errors import (
    ConnectivityError,
    DegenerateGeometryError,
    InvalidParameterError,
    RankDeficiencyError,
    ZeroDegreeError,
)
from ergograph.graphs import Graph, ShiftKind


def test_directed_cycle_edges_match_figure():
    g = graphs.directed_cycle(6)
    # 1-based: (1->2), ..., (6->1)
    assert [(i + 1, j + 1) for i, j, _ in g.edges] == [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 1)]
    assert g.directed


def test_directed_cycle_two_nodes():
    g = graphs.directed_cycle(2)
    assert [(i, j) for i, j, _ in g.edges] == [(0, 1), (1, 0)]


def test_directed_cycle_adjacency_is_cyclic_permutation():
    s = graphs.adjacency_shift(graphs.directed_cycle(4))
    a = s.dense()
    assert s.kind is ShiftKind.DIRECTED_CYCLE_ADJACENCY
    # [A]_{1 + n mod N, n} = 1
    for n in range(4):
        assert a[(n + 1) % 4, n] == 1
    assert a.sum() == 4
    np.testing.assert_array_equal(np.linalg.matrix_power(a, 4), np.eye(4))


def test_directed_cycle_rejects_small():
    with pytest.raises(InvalidParameterError):
        graphs.directed_cycle(1)


def test_erdos_renyi_complete_when_p_one():
    g = graphs.erdos_renyi(5, 1.0, np.random.default_rng(0))
    assert len(g.edges) == 10


def test_erdos_renyi_connected_and_deterministic():
    a = graphs.erdos_renyi(10, 0.2, np.random.default_rng(7))
    b = graphs.erdos_renyi(10, 0.2, np.random.default_rng(7))
    assert graphs.is_connected(a)
    assert 1 <= len(a.edges) <= 45
    assert a.edges == b.edges


@pytest.mark.parametrize("p", [0.0, -0.1, 1.5])
def test_erdos_renyi_bad_probability(p):
    with pytest.raises(InvalidParameterError):
        graphs.erdos_renyi(10, p, np.random.default_rng(0))


def test_erdos_renyi_gives_up():
    with pytest.raises(ConnectivityError):
        graphs.erdos_renyi(40, 1e-4, np.random.default_rng(0))


def test_erdos_renyi_edge_count_statistics():
    n, p = 50, 0.2
    counts = np.array([len(graphs.erdos_renyi(n, p, np.random.default_rng(s)).edges) for s in range(200)])
    pairs = n * (n - 1) // 2
    expected = p * pairs
    sd = math.sqrt(pairs * p * (1 - p))
    # mean of 200 draws: 3 standard errors
    assert abs(counts.mean() - expected) <= 3 * sd / math.sqrt(len(counts))


def test_sbm_isolated_cliques_fail():
    with pytest.raises(ConnectivityError):
        graphs.sbm(8, 4, 1.0, 0.0, np.random.default_rng(0))


def test_sbm_community_sizes():
    assert graphs.community_sizes(10, 4) == [3, 3, 2, 2]
    g = graphs.sbm(10, 4, 0.9, 0.5, np.random.default_rng(1))
    assert np.bincount(g.communities).tolist() == [3, 3, 2, 2]


def test_sbm_intra_density():
    n, c, p_in = 40, 4, 0.6
    intra_pairs = sum(s * (s - 1) // 2 for s in graphs.community_sizes(n, c))
    dens = []
    for seed in range(100):
        g = graphs.sbm(n, c, p_in, 0.1, np.random.default_rng(seed))
        lab = g.communities
        dens.append(sum(lab[i] == lab[j] for i, j, _ in g.edges) / intra_pairs)
    sd = math.sqrt(p_in * (1 - p_in) / intra_pairs)
    assert abs(np.mean(dens) - p_in) <= 3 * sd / math.sqrt(len(dens))


@pytest.mark.parametrize("args", [(8, 0, 0.5, 0.1), (3, 4, 0.5, 0.1), (8, 2, 0.1, 0.5)])
def test_sbm_bad_parameters(args):
    with pytest.raises(InvalidParameterError):
        graphs.sbm(*args, np.random.default_rng(0))


def test_sensor_network_two_nodes_degenerate():
    with pytest.raises(DegenerateGeometryError):
        graphs.sensor_network(2, 0.01, 1.0, 1.75, np.random.default_rng(0))


def test_sensor_network_default_parameters():
    g = graphs.sensor_network(50, 0.01, 1.0, 1.75, np.random.default_rng(3))
    assert graphs.is_connected(g)
    rho = graphs.influence_matrix(g.positions, 0.01, 1.0)
    off = ~np.eye(50, dtype=bool)
    thres = 1.75 * rho[off].mean()
    w = np.array([w for _, _, w in g.edges])
    assert w.min() >= thres
    assert w.max() <= 1.0 + 1e-12
    # every pair at or above threshold is an edge
    assert len(g.edges) == np.count_nonzero(np.triu(rho >= thres, k=1))


def test_sensor_network_weights_recomputable():
    g = graphs.sensor_network(20, 0.01, 1.0, 1.75, np.random.default_rng(11))
    pos = g.positions
    d2 = ((pos[:, None] - pos[None]) ** 2).sum(-1)
    off = ~np.eye(20, dtype=bool)
    beta = math.log(1.0 / 0.01) / (d2[off].max() - d2[off].min())
    alpha = 1.0 * math.exp(beta * d2[off].min())
    for i, j, w in g.edges:
        assert abs(w - alpha * math.exp(-beta * d2[i, j])) <= 1e-12


def test_influence_range():
    pos = np.random.default_rng(5).random((30, 2))
    rho = graphs.influence_matrix(pos, 0.01, 1.0)
    off = rho[~np.eye(30, dtype=bool)]
    assert off.min() >= 0.01 - 1e-9
    assert off.max() <= 1.0 + 1e-9
    assert abs(off.min() - 0.01) <= 1e-9 and abs(off.max() - 1.0) <= 1e-9


def test_covariance_graph_identity_concentrates():
    g = graphs.covariance_graph(3, 100_000, np.random.default_rng(0), sigma=np.eye(3))
    assert np.abs(g.covariance - np.eye(3)).max() <= 0.05


def test_covariance_graph_single_node():
    g = graphs.covariance_graph(1, 50, np.random.default_rng(0))
    s = graphs.covariance_shift(g)
    assert s.dense().shape == (1, 1)
    assert s.dense()[0, 0] > 0
    assert g.edges == []


def test_covariance_graph_symmetric_psd():
    g = graphs.covariance_graph(10, 500, np.random.default_rng(4))
    c = g.covariance
    assert np.abs(c - c.T).max() <= 1e-14
    assert np.linalg.eigvalsh(c).min() >= -1e-12
    assert graphs.default_shift(g).kind is ShiftKind.SAMPLE_COVARIANCE


def test_covariance_graph_too_few_samples():
    with pytest.raises(RankDeficiencyError):
        graphs.covariance_graph(10, 5, np.random.default_rng(0))


def test_path_adjacency_and_normalized():
    g = graphs.path_graph(3)
    np.testing.assert_array_equal(graphs.adjacency_shift(g).dense(), [[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    na = graphs.normalized_adjacency_shift(g).dense()
    r = 1 / math.sqrt(2)
    np.testing.assert_allclose(na, [[0, r, 0], [r, 0, r], [0, r, 0]], atol=1e-15)


@pytest.mark.parametrize("n", [3, 5, 8])
def test_complete_graph_normalized_top_eigenvalue(n):
    na = graphs.normalized_adjacency_shift(graphs.complete_graph(n)).dense()
    assert abs(np.linalg.eigvalsh(na).max() - 1.0) <= 1e-12


def test_normalized_adjacency_zero_degree():
    g = Graph(n=3, edges=[(0, 1, 1.0)])
    with pytest.raises(ZeroDegreeError):
        graphs.normalized_adjacency_shift(g)


def test_is_connected_cases():
    assert graphs.is_connected(graphs.path_graph(3))
    assert not graphs.is_connected(Graph(n=4, edges=[(0, 1, 1.0), (2, 3, 1.0)]))
    assert graphs.is_connected(graphs.directed_cycle(5))


def test_no_self_loops():
    with pytest.raises(InvalidParameterError):
        Graph(n=2, edges=[(0, 0, 1.0)])


def test_json_round_trip_lossless():
    g = graphs.sensor_network(15, 0.01, 1.0, 1.75, np.random.default_rng(2))
    back = Graph.from_json(g.to_json())
    assert back.n == g.n and back.directed == g.directed
    assert back.edges == g.edges
    np.testing.assert_array_equal(back.positions, g.positions)


def test_json_uses_one_based_indices():
    import json

    doc = json.loads(graphs.directed_cycle(3).to_json())
    assert doc == {"n": 3, "directed": True, "edges": [[1, 2, 1.0], [2, 3, 1.0], [3, 1, 1.0]]}


def test_adjacency_symmetric_nonnegative():
    rng = np.random.default_rng(9)
    for _ in range(10):
        a = graphs.adjacency_shift(graphs.erdos_renyi(25, 0.3, rng)).dense()
        assert np.array_equal(a, a.T)
        assert a.min() >= 0
