"""
Feasible graph construction
Each extended-graph vertex is replicated at depths 0..gamma, where depth counts
accumulated latency in quanta of delta/gamma. An edge joins two replicas only if
its depth step equals ceil(gamma * (T + C) / delta), so every source-to-terminal
path honors the latency target by topology alone. Edges breaking the rate limits
and exits below the accuracy target are pruned.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass

import networkx as nx

from fin.extended_graph import Vertex

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class ReplicaVertex:
    """The depth-g replica of an extended-graph vertex"""
    base: Vertex
    depth: int

    @property
    def block(self):
        return self.base.block

    @property
    def node(self):
        return self.base.node

    def __str__(self):
        return f"({self.base.node}, {self.base.block})@{self.depth}"


def edge_steepness(latency, delta, gamma):
    """Depth step of an edge: ceil(gamma * latency / delta)"""
    return math.ceil(gamma * latency / delta)


def violates_rates(weights, rate):
    """
    Whether an edge exceeds the application's bandwidth or compute slice

    Args:
        weights: EdgeWeights of the edge
        rate: Inference rate sigma of the application

    Returns:
        bool: True if sigma*tau*d > b or sigma*tau*o > c
    """
    load = rate * weights.traversal_fraction
    if load * weights.data_bits > weights.bandwidth:
        return True
    return load * weights.ops > weights.compute


class FeasibleGraph:
    """Depth-replicated, pruned DAG of latency-feasible placements"""

    def __init__(self, ext, gamma):
        self.ext = ext
        self.app = ext.app
        self.application_id = ext.application_id
        self.gamma = gamma
        self.graph = nx.DiGraph()
        self.source = ReplicaVertex(ext.source, 0)
        self.terminals = frozenset()

    @property
    def is_empty(self):
        return self.graph.number_of_nodes() == 0

    @property
    def vertices(self):
        return sorted(self.graph.nodes, key=lambda r: (r.block, r.depth, r.node))

    def successors(self, vertex):
        return sorted(self.graph.successors(vertex), key=lambda r: (r.block, r.depth, r.node))

    def edge(self, tail, head):
        """Edge attributes: weights, steepness and cost"""
        return self.graph.edges[tail, head]

    def vertex_label(self, vertex):
        return str(vertex)

    def edge_label(self, tail, head):
        w = self.graph.edges[tail, head]['weights']
        return f"{w.transfer_time:.3g}|{w.compute_time:.3g}|{w.energy:.3g}"

    def __len__(self):
        return self.graph.number_of_nodes()


def build_feasible_graph(ext, app, gamma):
    """
    Build the feasible graph of an application

    Args:
        ext: ExtendedGraph of the application
        app: Application (its delta, alpha and sigma drive the pruning)
        gamma: Depth resolution, at least 1

    Returns:
        FeasibleGraph; empty when no terminal replica is reachable

    Raises:
        ValueError: If gamma < 1
    """
    if gamma < 1:
        raise ValueError(f"gamma must be at least 1, got {gamma}")

    delta = app.target_latency
    rate = app.inference_rate
    fg = FeasibleGraph(ext, gamma)

    rate_pruned = 0
    too_steep = 0
    usable = {}
    for tail, head, weights in ext.edges():
        if violates_rates(weights, rate):
            rate_pruned += 1
            continue
        step = edge_steepness(weights.latency, delta, gamma)
        if step > gamma:
            too_steep += 1
            continue
        usable.setdefault(tail, []).append((head, weights, step))

    # Replicas reachable from the depth-0 source
    fg.graph.add_node(fg.source)
    queue = deque([fg.source])
    while queue:
        replica = queue.popleft()
        for head, weights, step in usable.get(replica.base, ()):
            depth = replica.depth + step
            if depth > gamma:
                continue
            target = ReplicaVertex(head, depth)
            if target not in fg.graph:
                fg.graph.add_node(target)
                queue.append(target)
            fg.graph.add_edge(replica, target, weights=weights, steepness=step,
                              cost=weights.expected_energy)

    terminals = {r for r in fg.graph.nodes if r.base in ext.terminal_vertices}

    # Keep only replicas that lead to a terminal
    useful = set(terminals)
    queue = deque(terminals)
    while queue:
        replica = queue.popleft()
        for tail in fg.graph.predecessors(replica):
            if tail not in useful:
                useful.add(tail)
                queue.append(tail)

    if fg.source not in useful:
        fg.graph.clear()
        fg.terminals = frozenset()
        logger.debug("Feasible graph for %s (gamma=%d) is empty: %d edges rate-pruned, %d too steep",
                     app.id, gamma, rate_pruned, too_steep)
        return fg

    fg.graph.remove_nodes_from([r for r in list(fg.graph.nodes) if r not in useful])
    fg.terminals = frozenset(terminals)

    logger.debug("Feasible graph for %s (gamma=%d): %d replicas, %d edges, %d terminals",
                 app.id, gamma, fg.graph.number_of_nodes(), fg.graph.number_of_edges(), len(terminals))
    return fg


def steepness(fg, path):
    """
    Steepness of a path of replicas: the sum of its edge steepness values

    Args:
        fg: FeasibleGraph
        path: Sequence of ReplicaVertex

    Returns:
        int: Sum of edge steepness, equal to depth(last) - depth(first)

    Raises:
        ValueError: If consecutive replicas are not joined by an edge
    """
    total = 0
    for tail, head in zip(path, path[1:]):
        if not fg.graph.has_edge(tail, head):
            raise ValueError(f"Path is disconnected between {tail} and {head}")
        total += fg.graph.edges[tail, head]['steepness']
    return total
