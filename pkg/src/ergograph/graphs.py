"""Graph families and their shift operators.

Vertices are 0-based inside the library. The JSON format uses 1-based
indices, matching the usual mathematical convention for node labels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .errors import (
    ConnectivityError,
    DegenerateGeometryError,
    InvalidParameterError,
    RankDeficiencyError,
    ZeroDegreeError,
)

MAX_RESAMPLES = 1000


@dataclass
class Graph:
    """Weighted graph without self-loops.

    ``edges`` holds ``(source, target, weight)`` triples. Undirected graphs
    store each edge once, with ``source < target``.

    ``positions`` (sensor networks), ``communities`` (SBMs) and
    ``covariance`` (covariance graphs) carry generator-specific data.
    """

    n: int
    edges: list[tuple[int, int, float]]
    directed: bool = False
    positions: np.ndarray | None = None
    communities: np.ndarray | None = None
    covariance: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"graph needs at least one vertex, got {self.n}")
        for i, j, _ in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidParameterError(f"edge ({i}, {j}) out of range for n={self.n}")
            if i == j:
                raise InvalidParameterError(f"self-loop at vertex {i}")

    @property
    def n_directed_edges(self) -> int:
        return len(self.edges) if self.directed else 2 * len(self.edges)

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "directed": self.directed,
            "edges": [[i + 1, j + 1, float(w)] for i, j, w in self.edges],
        }
        if self.positions is not None:
            doc["positions"] = self.positions.tolist()
        if self.communities is not None:
            doc["communities"] = [int(c) for c in self.communities]
        if self.covariance is not None:
            doc["covariance"] = self.covariance.tolist()
        # json writes floats with repr(), which is the shortest exact round trip
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> Graph:
        doc = json.loads(text)
        try:
            n = int(doc["n"])
            edges = [(int(i) - 1, int(j) - 1, float(w)) for i, j, w in doc["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParameterError(f"malformed graph JSON: {exc}") from exc

        def opt(key, dtype):
            return None if key not in doc else np.asarray(doc[key], dtype=dtype)

        return cls(
            n=n,
            edges=edges,
            directed=bool(doc.get("directed", False)),
            positions=opt("positions", float),
            communities=opt("communities", int),
            covariance=opt("covariance", float),
        )


class ShiftKind(str, Enum):
    ADJACENCY = "adjacency"
    NORMALIZED_ADJACENCY = "normalized_adjacency"
    DIRECTED_CYCLE_ADJACENCY = "directed_cycle_adjacency"
    SAMPLE_COVARIANCE = "sample_covariance"


@dataclass
class ShiftOperator:
    """An N x N shift matrix, sparse for graph kinds and dense for covariances."""

    matrix: sparse.csr_array | np.ndarray
    kind: ShiftKind
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x):
        """Return ``S @ x`` for a signal or a column stack of signals."""
        return self.matrix @ x

    def dense(self) -> np.ndarray:
        if sparse.issparse(self.matrix):
            return self.matrix.toarray()
        return np.asarray(self.matrix)


# --- construction helpers -------------------------------------------------


def _check_size(n, minimum=2):
    if int(n) != n or n < minimum:
        raise InvalidParameterError(f"N must be an integer >= {minimum}, got {n}")


def _edges_from_upper(mask: np.ndarray, weights: np.ndarray | None = None):
    rows, cols = np.nonzero(np.triu(mask, k=1))
    if weights is None:
        return [(int(i), int(j), 1.0) for i, j in zip(rows, cols)]
    return [(int(i), int(j), float(weights[i, j])) for i, j in zip(rows, cols)]


def _resample(draw, what):
    for _ in range(MAX_RESAMPLES):
        g = draw()
        if is_connected(g):
            return g
    raise ConnectivityError(f"{what}: no connected realization in {MAX_RESAMPLES} attempts")


def directed_cycle(n: int) -> Graph:
    _check_size(n)
    return Graph(n=n, edges=[(k, (k + 1) % n, 1.0) for k in range(n)], directed=True)


def path_graph(n: int) -> Graph:
    _check_size(n, minimum=1)
    return Graph(n=n, edges=[(k, k + 1, 1.0) for k in range(n - 1)])


def complete_graph(n: int) -> Graph:
    _check_size(n, minimum=1)
    return Graph(n=n, edges=[(i, j, 1.0) for i in range(n) for j in range(i + 1, n)])


def erdos_renyi(n: int, p_er: float, rng: np.random.Generator) -> Graph:
    """Connected G(N, p) graph; disconnected draws are discarded."""
    _check_size(n)
    if not 0 < p_er <= 1:
        raise InvalidParameterError(f"p_er must lie in (0, 1], got {p_er}")

    def draw():
        return Graph(n=n, edges=_edges_from_upper(rng.random((n, n)) < p_er))

    return _resample(draw, f"erdos_renyi(N={n}, p={p_er})")


def community_sizes(n: int, c: int) -> list[int]:
    base, extra = divmod(n, c)
    return [base + (1 if a < extra else 0) for a in range(c)]


def sbm(n: int, c: int, p_in: float, p_out: float, rng: np.random.Generator) -> Graph:
    """Stochastic block model with C near-equal communities."""
    if c < 1 or n < c:
        raise InvalidParameterError(f"need 1 <= C <= N, got C={c}, N={n}")
    if not 0 <= p_out <= p_in <= 1:
        raise InvalidParameterError(f"need 0 <= p_out <= p_in <= 1, got {p_out}, {p_in}")
    labels = np.repeat(np.arange(c), community_sizes(n, c))
    prob = np.where(labels[:, None] == labels[None, :], p_in, p_out)

    def draw():
        mask = rng.random((n, n)) < prob
        return Graph(n=n, edges=_edges_from_upper(mask), communities=labels.copy())

    return _resample(draw, f"sbm(N={n}, C={c})")


def influence_parameters(sq_dist_max, sq_dist_min, rho_min, rho_max):
    """Solve ``alpha * exp(-beta * d2)`` for the two extreme squared distances."""
    span = sq_dist_max - sq_dist_min
    if not span > 1e-15:
        raise DegenerateGeometryError("all pairwise distances are equal; beta is undetermined")
    beta = np.log(rho_max / rho_min) / span
    alpha = rho_max * np.exp(beta * sq_dist_min)
    return alpha, beta


def influence_matrix(positions, rho_min, rho_max):
    """Pairwise influence rho(i, j) with zero diagonal."""
    diff = positions[:, None, :] - positions[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    off = ~np.eye(len(positions), dtype=bool)
    alpha, beta = influence_parameters(d2[off].max(), d2[off].min(), rho_min, rho_max)
    rho = alpha * np.exp(-beta * d2)
    rho[~off] = 0.0
    return rho


def sensor_network(n, rho_min, rho_max, thres_factor, rng: np.random.Generator) -> Graph:
    """Random geometric sensor graph on the unit square with Gaussian-kernel weights."""
    _check_size(n)
    if not 0 < rho_min <= rho_max:
        raise InvalidParameterError(f"need 0 < rho_min <= rho_max, got {rho_min}, {rho_max}")
    if thres_factor <= 0:
        raise InvalidParameterError(f"thres_factor must be positive, got {thres_factor}")

    def draw():
        pos = rng.random((n, 2))
        rho = influence_matrix(pos, rho_min, rho_max)
        off = ~np.eye(n, dtype=bool)
        threshold = thres_factor * rho[off].mean()
        return Graph(n=n, edges=_edges_from_upper(rho >= threshold, rho), positions=pos)

    return _resample(draw, f"sensor_network(N={n})")


def random_covariance(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, n))
    return g @ g.T / n + 0.1 * np.eye(n)


def covariance_graph(n, n_samples, rng: np.random.Generator, sigma=None) -> Graph:
    """Graph whose shift is the sample covariance of zero-mean Gaussian draws.

    ``sigma`` overrides the random ground-truth covariance.
    """
    _check_size(n, minimum=1)
    if n_samples < n:
        raise RankDeficiencyError(f"{n_samples} samples cannot estimate an {n}x{n} covariance")
    if sigma is None:
        sigma = random_covariance(n, rng)
    chol = np.linalg.cholesky(np.asarray(sigma, dtype=float))
    draws = rng.standard_normal((n_samples, n)) @ chol.T
    # known zero mean: divide by n_samples, no centering
    est = draws.T @ draws / n_samples
    est = 0.5 * (est + est.T)
    off = np.triu(est != 0, k=1)
    edges = [(int(i), int(j), float(est[i, j])) for i, j in zip(*np.nonzero(off))]
    return Graph(n=n, edges=edges, covariance=est)


# --- shift operators --------------------------------------------------------


def _weighted_matrix(g: Graph) -> sparse.csr_array:
    if g.edges:
        src, dst, w = (np.asarray(col) for col in zip(*g.edges))
    else:
        src = dst = np.zeros(0, dtype=int)
        w = np.zeros(0)
    # [S]_{ij} != 0 only when (j, i) is an edge
    a = sparse.coo_array((w.astype(float), (dst.astype(int), src.astype(int))), shape=(g.n, g.n))
    if not g.directed:
        a = a + a.T
    a = sparse.csr_array(a)
    a.sort_indices()
    return a


def is_connected(g: Graph) -> bool:
    if g.n == 1:
        return True
    a = _weighted_matrix(g)
    mode = "strong" if g.directed else "weak"
    n_comp, _ = connected_components(a, directed=g.directed, connection=mode)
    return n_comp == 1


def adjacency_shift(g: Graph) -> ShiftOperator:
    kind = ShiftKind.DIRECTED_CYCLE_ADJACENCY if _is_directed_cycle(g) else ShiftKind.ADJACENCY
    return ShiftOperator(_weighted_matrix(g), kind)


def normalized_adjacency_shift(g: Graph) -> ShiftOperator:
    a = _weighted_matrix(g)
    deg = np.asarray(a.sum(axis=1)).ravel()
    if np.any(deg <= 0):
        raise ZeroDegreeError(f"vertices {np.flatnonzero(deg <= 0).tolist()} have zero degree")
    scale = sparse.diags_array(1.0 / np.sqrt(deg))
    m = sparse.csr_array(scale @ a @ scale)
    m.sort_indices()
    return ShiftOperator(m, ShiftKind.NORMALIZED_ADJACENCY)


def covariance_shift(g: Graph) -> ShiftOperator:
    if g.covariance is None:
        raise InvalidParameterError("graph carries no sample covariance")
    return ShiftOperator(np.array(g.covariance, dtype=float), ShiftKind.SAMPLE_COVARIANCE)


def default_shift(g: Graph) -> ShiftOperator:
    """The shift each family uses in the experiments."""
    if g.covariance is not None:
        return covariance_shift(g)
    return adjacency_shift(g)


def _is_directed_cycle(g: Graph) -> bool:
    if not g.directed or len(g.edges) != g.n:
        return False
    return sorted((i, j, w) for i, j, w in g.edges) == [(k, (k + 1) % g.n, 1.0) for k in range(g.n)]
