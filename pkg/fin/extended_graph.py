"""
Single-plane extended graph
Vertices pair a network node with a DNN block of one application; an edge
(n, j-1) -> (n', j) places block j on n' and carries the time and energy weights
of moving block j-1's output from n to n' and computing block j there
"""
import logging
from dataclasses import dataclass

import graphviz
import networkx as nx

from fin.config import get_config
from fin.errors import GraphError, ScenarioValidationError
from fin.models import TrafficMode, parse_enum
from fin.scenario import effective_bandwidth, effective_compute, traversal_fraction

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Vertex:
    """A (node, block) pair; block 0 is the pure data-source vertex"""
    node: str
    block: int

    def __str__(self):
        return f"({self.node}, {self.block})"


@dataclass(frozen=True)
class EdgeWeights:
    """Time and energy weights of one extended-graph edge"""
    transfer_time: float
    compute_time: float
    energy: float
    data_bits: float
    ops: float
    traversal_fraction: float
    bandwidth: float
    compute: float
    comm_energy: float
    compute_energy: float

    @property
    def latency(self):
        return self.transfer_time + self.compute_time

    @property
    def expected_energy(self):
        """Per-inference energy weighted by the samples that use the edge"""
        return self.traversal_fraction * self.energy

    def to_dict(self):
        """Convert weights to dictionary"""
        return {
            'T': self.transfer_time,
            'C': self.compute_time,
            'E': self.energy,
            'd': self.data_bits,
            'o': self.ops,
            'tau': self.traversal_fraction
        }


def edge_energy_parts(data_bits, ops, sender, receiver):
    """
    Communication and computation energy of an edge

    Args:
        data_bits: Bits sent from sender to receiver
        ops: Operations executed on receiver
        sender: NetworkNode sending the tensor
        receiver: NetworkNode receiving and computing

    Returns:
        Tuple of (comm_energy, compute_energy) in joules
    """
    if sender.id == receiver.id:
        comm = 0.0
    else:
        comm = (sender.tx_energy_per_bit + receiver.rx_energy_per_bit) * data_bits
    return comm, receiver.energy_per_op * ops


def edge_energy(data_bits, ops, sender, receiver):
    """Per-inference energy of an edge: transmit, receive and compute"""
    comm, compute = edge_energy_parts(data_bits, ops, sender, receiver)
    return comm + compute


class ExtendedGraph:
    """
    Extended graph of one application

    The graph is stored as a networkx DiGraph whose edges carry an
    EdgeWeights object under the 'weights' key.
    """

    def __init__(self, scenario, app, mode):
        self.scenario = scenario
        self.app = app
        self.application_id = app.id
        self.mode = mode
        self.graph = nx.DiGraph()
        self.source = Vertex(app.source_node, 0)
        self.exit_vertices = frozenset()
        self.terminal_vertices = frozenset()

    @property
    def vertices(self):
        return sorted(self.graph.nodes, key=lambda v: (v.block, v.node))

    def weights(self, tail, head):
        return self.graph.edges[tail, head]['weights']

    def successors(self, vertex):
        """Heads reachable from a vertex, in deterministic order"""
        return sorted(self.graph.successors(vertex), key=lambda v: (v.block, v.node))

    def edges(self):
        """(tail, head, weights) triples in deterministic order"""
        for tail in self.vertices:
            for head in self.successors(tail):
                yield tail, head, self.weights(tail, head)

    def vertex_label(self, vertex):
        return str(vertex)

    def edge_label(self, tail, head):
        w = self.weights(tail, head)
        return f"{w.transfer_time:.3g}|{w.compute_time:.3g}|{w.energy:.3g}"

    def __len__(self):
        return self.graph.number_of_nodes()


def compute_weights(scenario, app, tail_node, head_node, head_block, mode):
    """
    Weights of the edge placing head_block on head_node after tail_node

    Returns:
        EdgeWeights, or None when the two nodes cannot communicate
    """
    bandwidth = effective_bandwidth(scenario, app.id, tail_node, head_node)
    if bandwidth <= 0:
        return None

    sender = scenario.node(tail_node)
    receiver = scenario.node(head_node)
    compute = effective_compute(scenario, app.id, head_node)
    data_bits = app.output_bits(head_block - 1)
    ops = app.block(head_block).total_ops

    transfer_time = 0.0 if tail_node == head_node else data_bits / bandwidth
    compute_time = ops / compute
    comm_energy, compute_energy = edge_energy_parts(data_bits, ops, sender, receiver)

    return EdgeWeights(
        transfer_time=transfer_time,
        compute_time=compute_time,
        energy=comm_energy + compute_energy,
        data_bits=data_bits,
        ops=ops,
        traversal_fraction=traversal_fraction(app, head_block - 1, mode),
        bandwidth=bandwidth,
        compute=compute,
        comm_energy=comm_energy,
        compute_energy=compute_energy
    )


def build_extended_graph(scenario, app_id, mode=None):
    """
    Build the extended graph of one application

    Args:
        scenario: Validated Scenario
        app_id: Application id
        mode: TrafficMode (or its name); defaults to the configured mode

    Returns:
        ExtendedGraph

    Raises:
        ScenarioValidationError: If the application is unknown
        GraphError: If no compute node is reachable from the data source
    """
    mode = parse_enum(TrafficMode, mode or get_config().DEFAULT_MODE)
    try:
        app = scenario.application(app_id)
    except KeyError:
        raise ScenarioValidationError(f"Unknown application: {app_id}", app_id)

    hosts = [node.id for node in scenario.nodes if effective_compute(scenario, app_id, node.id) > 0]

    g = ExtendedGraph(scenario, app, mode)
    g.graph.add_node(g.source)
    for block in app.blocks:
        for host in hosts:
            g.graph.add_node(Vertex(host, block.index))

    tails = [g.source]
    for block in app.blocks:
        for tail in tails:
            for host in hosts:
                weights = compute_weights(scenario, app, tail.node, host, block.index, mode)
                if weights is None:
                    continue
                head = Vertex(host, block.index)
                g.graph.add_edge(tail, head, weights=weights)
        tails = [Vertex(host, block.index) for host in hosts]

    if g.graph.out_degree(g.source) == 0:
        raise GraphError(f"No compute node reachable from source {app.source_node} of {app_id}", app_id)

    exits = set()
    terminals = set()
    for block in app.blocks:
        if block.exit is None:
            continue
        for host in hosts:
            vertex = Vertex(host, block.index)
            exits.add(vertex)
            if block.exit.accuracy >= app.target_accuracy:
                terminals.add(vertex)
    g.exit_vertices = frozenset(exits)
    g.terminal_vertices = frozenset(terminals)

    logger.debug("Extended graph for %s: %d vertices, %d edges, %d terminals",
                 app_id, g.graph.number_of_nodes(), g.graph.number_of_edges(), len(terminals))
    return g


def export_dot(graph, path):
    """
    Write a DOT rendering of an extended or feasible graph

    Args:
        graph: ExtendedGraph or FeasibleGraph
        path: Output file path

    Returns:
        Path written
    """
    vertices = graph.vertices
    dot = graphviz.Digraph(name=f"fin_{graph.application_id}")
    if vertices:
        dot.attr(rankdir='LR')

    ids = {}
    for number, vertex in enumerate(vertices):
        ids[vertex] = f"v{number}"
        dot.node(ids[vertex], graph.vertex_label(vertex))

    for tail in vertices:
        for head in graph.successors(tail):
            dot.edge(ids[tail], ids[head], label=graph.edge_label(tail, head))

    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(dot.source)

    logger.info("Wrote %d vertices to %s", len(vertices), path)
    return path


def placement_vertex_count(graph):
    """Vertices that host a block (the source vertex excluded)"""
    return sum(1 for vertex in graph.vertices if vertex.block > 0)
