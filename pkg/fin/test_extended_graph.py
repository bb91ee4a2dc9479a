"""
Tests for the extended graph
"""
import pytest

from fin.errors import GraphError, ScenarioValidationError
from fin.extended_graph import (
    Vertex, build_extended_graph, edge_energy, export_dot, placement_vertex_count
)
from fin.experiments import with_targets
from fin.models import TrafficMode
from fin.scenario import load_scenario


def test_vertices_and_edges(tiny):
    """Test every host-block pair becomes a vertex and links become edges"""
    g = build_extended_graph(tiny, 'a', TrafficMode.survival)

    assert g.source == Vertex('src', 0)
    assert placement_vertex_count(g) == 4
    assert g.successors(g.source) == [Vertex('m', 1)]
    assert g.successors(Vertex('m', 1)) == [Vertex('e', 2), Vertex('m', 2)]
    assert g.successors(Vertex('e', 1)) == [Vertex('e', 2), Vertex('m', 2)]
    assert g.terminal_vertices == {Vertex('m', 2), Vertex('e', 2)}
    assert Vertex('m', 1) in g.exit_vertices


def test_edge_weights(tiny):
    """Test time and energy weights of the three reachable edges"""
    g = build_extended_graph(tiny, 'a', 'survival')

    first = g.weights(g.source, Vertex('m', 1))
    assert first.transfer_time == 0.0
    assert first.compute_time == pytest.approx(1e-3)
    assert first.energy == pytest.approx(1e-3)
    assert first.traversal_fraction == 1.0

    stay = g.weights(Vertex('m', 1), Vertex('m', 2))
    assert stay.transfer_time == 0.0
    assert stay.comm_energy == 0.0
    assert stay.compute_time == pytest.approx(4e-3)
    assert stay.energy == pytest.approx(4e-3)
    assert stay.traversal_fraction == pytest.approx(0.5)

    move = g.weights(Vertex('m', 1), Vertex('e', 2))
    assert move.data_bits == 1000
    assert move.transfer_time == pytest.approx(1e-3)
    assert move.compute_time == pytest.approx(4e-4)
    assert move.comm_energy == pytest.approx(2e-6)
    assert move.compute_energy == pytest.approx(2e-3)
    assert move.energy == move.comm_energy + move.compute_energy
    assert move.expected_energy == pytest.approx(1.001e-3)


def test_literal_mode_weights(tiny):
    """Test literal mode weights edges by the tail block's exit fraction"""
    g = build_extended_graph(tiny, 'a', 'literal')
    assert g.weights(Vertex('m', 1), Vertex('e', 2)).traversal_fraction == pytest.approx(0.5)
    assert g.mode == TrafficMode.literal


def test_edge_energy_on_same_node():
    """Test co-located blocks pay no communication energy"""
    scenario = load_scenario('b_alexnet_cifar10.json')
    mobile = scenario.node('mobile')
    edge = scenario.node('edge')
    assert edge_energy(1e6, 0, mobile, mobile) == 0.0
    assert edge_energy(1e6, 0, mobile, edge) == pytest.approx((30e-9 + 37e-9) * 1e6)
    assert edge_energy(0, 1e9, mobile, mobile) == pytest.approx(1e9 * 6 / 11e12)


def test_unreachable_source(make_tiny):
    """Test a source without outgoing links is a graph error"""
    scenario = make_tiny(links=[{'from': 'm', 'to': 'e'}])
    with pytest.raises(GraphError):
        build_extended_graph(scenario, 'a')


def test_unknown_application(tiny):
    """Test an unknown application id is reported"""
    with pytest.raises(ScenarioValidationError):
        build_extended_graph(tiny, 'nope')


def test_no_terminal_when_target_unreachable():
    """Test exits below the accuracy target are not terminals"""
    scenario = load_scenario('b_alexnet_cifar100.json')
    strict = with_targets(scenario, 'h1', alpha=0.80)
    g = build_extended_graph(strict, 'h1')
    assert g.terminal_vertices == frozenset()
    assert len(g.exit_vertices) == 9


def test_export_dot(tiny, tmp_path):
    """Test DOT export writes one node per vertex"""
    g = build_extended_graph(tiny, 'a')
    path = tmp_path / 'tiny.dot'
    export_dot(g, path)
    text = path.read_text(encoding='utf-8')
    assert text.startswith('digraph fin_a')
    assert '(m, 1)' in text
    assert text.count('->') == g.graph.number_of_edges()
