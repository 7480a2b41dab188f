import numpy as np
import pytest

from ergograph import graphs


def random_connected_graphs(count, seed, max_n=32):
    """Mixed corpus of connected graphs from every undirected family."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(5, max_n + 1))
        kind = i % 4
        if kind == 0:
            g = graphs.erdos_renyi(n, float(rng.uniform(0.2, 0.6)), rng)
        elif kind == 1:
            g = graphs.sbm(max(n, 8), 4, 0.7, 0.2, rng)
        elif kind == 2:
            g = graphs.sensor_network(max(n, 10), 0.01, 1.0, 1.0, rng)
        else:
            g = graphs.covariance_graph(n, 20 * n, rng)
        out.append(g)
    return out


@pytest.fixture(scope="session")
def graph_corpus():
    return random_connected_graphs(100, seed=2024)


@pytest.fixture(scope="session")
def nonnegative_corpus(graph_corpus):
    return [g for g in graph_corpus if g.covariance is None]


# Every Graph built anywhere in the session, for the suite-wide dominance check.
GENERATED_GRAPHS = []
_graph_init = graphs.Graph.__post_init__


def _recording_init(self):
    _graph_init(self)
    GENERATED_GRAPHS.append(self)


graphs.Graph.__post_init__ = _recording_init

ACCEPTANCE_LINES = {}


def pytest_collection_modifyitems(items):
    # acceptance runs last so the dominance criterion sees every generated graph
    items.sort(key=lambda item: item.fspath.basename == "test_acceptance.py")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
