"""Graph shift average run as a synchronous neighbor-exchange protocol.

Each node only ever sees the values its in-neighbors send it. The per-node
arithmetic is the centralized diffusion re-bracketed, so the result matches
``graph_shift_average`` up to summation order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .estimators import diffusion_weights
from .graphs import Graph, ShiftOperator


@dataclass
class NodeState:
    """Local state of one node.

    ``current`` holds ``[(S / lambda1)^l x]_k`` after round ``l``;
    ``accumulator`` the running weighted sum that becomes the estimate.
    """

    node_id: int
    current: float
    accumulator: float
    round: int = 0


@dataclass
class DiffusionTrace:
    rounds: int
    messages_sent: int
    per_node_estimates: np.ndarray
    history: list[tuple[int, int, float]] = field(default_factory=list)

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(["round", "node", "current"])
        for r, k, value in self.history:
            writer.writerow([r, k + 1, format(value, ".17g")])


def _neighbors(matrix):
    """In-neighbor lists ``{k: [(j, s_kj), ...]}`` sorted by ``j``, excluding self-loops."""
    m = sparse.csr_array(matrix)
    m.sort_indices()
    n = m.shape[0]
    incoming, self_weight = [], np.zeros(n)
    for k in range(n):
        lo, hi = m.indptr[k], m.indptr[k + 1]
        row = []
        for j, w in zip(m.indices[lo:hi], m.data[lo:hi]):
            if j == k:
                self_weight[k] = w
            elif w != 0:
                row.append((int(j), float(w)))
        incoming.append(row)
    outgoing = [[] for _ in range(n)]
    for k, row in enumerate(incoming):
        for j, _ in row:
            outgoing[j].append(k)
    return incoming, outgoing, self_weight


def _node_update(state: NodeState, self_weight: float, in_weights: list, inbox: dict, lambda1: float, w: float):
    """Advance one node by one round using only the messages it received."""
    total = self_weight * state.current
    for j, s_kj in in_weights:
        total += s_kj * inbox[j]
    state.current = total / lambda1
    state.accumulator += w * state.current
    state.round += 1


def simulate_diffusion(
    g: Graph, s: ShiftOperator, lambda1: float, x, depth: int, record: bool = False
) -> DiffusionTrace:
    """Run ``depth - 1`` synchronous rounds of neighbor exchange.

    In every round each node sends its ``current`` value to each
    out-neighbor, then all nodes update simultaneously. ``g`` is only used
    for its size; the communication pattern is the sparsity of ``s``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,) or s.n != g.n:
        raise ValueError("signal, graph and shift dimensions disagree")
    weights = diffusion_weights(lambda1, depth)
    incoming, outgoing, self_weight = _neighbors(s.matrix)
    nodes = [NodeState(k, x[k], weights[0] * x[k]) for k in range(g.n)]
    history = [(0, k, nodes[k].current) for k in range(g.n)] if record else []
    messages = 0

    for r in range(1, depth):
        inboxes = [{} for _ in range(g.n)]
        for sender in nodes:
            for k in outgoing[sender.node_id]:
                inboxes[k][sender.node_id] = sender.current
                messages += 1
        # barrier: every message of round r is delivered before any update
        for state in nodes:
            k = state.node_id
            _node_update(state, self_weight[k], incoming[k], inboxes[k], lambda1, weights[r])
        if record:
            history.extend((r, st.node_id, st.current) for st in nodes)

    estimates = np.array([st.accumulator for st in nodes])
    return DiffusionTrace(depth - 1, messages, estimates, history)
