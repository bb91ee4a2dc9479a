"""
Property checks on seeded random desk instances
Exhaustive search bounds the FIN solvers, extra resources never raise the optimum,
feasible-graph paths honor the constraints and evaluation matches a naive recomputation
"""
from dataclasses import replace

import networkx as nx
import numpy as np
import pytest

from fin.baselines import solve_mcp, solve_opt
from fin.desk import DESK_APP, random_configuration, random_desk_scenario
from fin.evaluation import evaluate
from fin.extended_graph import build_extended_graph
from fin.feasible_graph import build_feasible_graph
from fin.fin_solver import configuration_from_path, solve_exact, solve_greedy
from fin.models import Algorithm, Tier

INSTANCES = 100
TOLERANCE = 1e-9


def _desk(seed):
    rng = np.random.default_rng(seed)
    return random_desk_scenario(rng, node_count=int(rng.integers(3, 5)), block_count=int(rng.integers(3, 7)))


def _feasible(scenario, gamma):
    ext = build_extended_graph(scenario, DESK_APP)
    return build_feasible_graph(ext, ext.app, gamma)


def _honors_constraints(scenario, cfg):
    report = evaluate(scenario, DESK_APP, cfg)
    app = scenario.application(DESK_APP)
    return (report.accuracy_ok and report.bandwidth_ok and report.compute_ok
            and report.latency <= app.target_latency * (1 + TOLERANCE))


def _opt_has_slack(scenario, opt, gamma):
    """Whether Opt's own path survives latency quantization at this gamma"""
    report = evaluate(scenario, DESK_APP, opt.configuration)
    delta = scenario.application(DESK_APP).target_latency
    edges = len(opt.configuration.placements)
    return report.latency_slack >= (edges + 0.5) * delta / gamma


@pytest.mark.parametrize('gamma', [3, 10, 50])
def test_opt_bounds_fin(gamma):
    """Test Opt never loses to FIN and report how often FIN exceeds (1 + 1/gamma) of Opt"""
    compared = exceeded = 0
    worst = 1.0
    for seed in range(INSTANCES):
        scenario = _desk(seed)
        fin = solve_exact(_feasible(scenario, gamma))
        opt = solve_opt(scenario, DESK_APP, guard=10 ** 6)

        if fin is None:
            assert opt is None or not _opt_has_slack(scenario, opt, gamma), seed
            continue
        assert opt is not None, seed
        assert opt.energy <= fin.energy * (1 + TOLERANCE), seed
        compared += 1
        ratio = fin.energy / opt.energy if opt.energy > 0 else 1.0
        worst = max(worst, ratio)
        if ratio > (1 + 1 / gamma) * (1 + TOLERANCE):
            exceeded += 1
    assert compared > 0
    print(f"\ngamma={gamma}: FIN above (1 + 1/gamma) x Opt on {exceeded}/{compared} instances, "
          f"worst ratio {worst:.3g}")


def test_fin_converges_at_fine_resolution():
    """Test gamma = 1000 matches Opt wherever Opt's latency keeps 0.2 % slack"""
    compared = 0
    for seed in range(2 * INSTANCES):
        scenario = _desk(seed)
        opt = solve_opt(scenario, DESK_APP, guard=10 ** 6)
        if opt is None:
            continue
        report = evaluate(scenario, DESK_APP, opt.configuration)
        if report.latency_slack < 0.002 * scenario.application(DESK_APP).target_latency:
            continue
        fin = solve_exact(_feasible(scenario, 1000))
        assert fin is not None, seed
        assert fin.energy <= opt.energy * (1 + TOLERANCE), seed
        compared += 1
    assert compared > 0
    print(f"\ngamma=1000: FIN equals Opt on {compared} instances")


def _doubled(scenario, bandwidth=1.0, compute=1.0):
    """Scale every capacity; compute power scales along so energy per operation is unchanged"""
    nodes = tuple(replace(node,
                          compute_capacity=node.compute_capacity * compute,
                          compute_power=node.compute_power * compute,
                          uplink_capacity=node.uplink_capacity * bandwidth,
                          downlink_capacity=node.downlink_capacity * bandwidth)
                  for node in scenario.nodes)
    links = tuple(replace(link, bandwidth=link.bandwidth * bandwidth) for link in scenario.links)
    return replace(scenario, nodes=nodes, links=links)


@pytest.mark.parametrize('bandwidth, compute', [(2.0, 1.0), (1.0, 2.0)])
def test_more_resources_never_cost_more(bandwidth, compute):
    """Test doubling bandwidth or compute never raises the optimal energy"""
    compared = 0
    for seed in range(INSTANCES):
        scenario = _desk(seed)
        base = solve_opt(scenario, DESK_APP, guard=10 ** 6)
        if base is None:
            continue
        richer = solve_opt(_doubled(scenario, bandwidth, compute), DESK_APP, guard=10 ** 6)
        assert richer is not None, seed
        assert richer.energy <= base.energy * (1 + TOLERANCE), seed
        compared += 1
    assert compared > 0


@pytest.mark.parametrize('lam', [1, 5, 10])
def test_greedy_never_beats_exact(lam):
    """Test greedy energy is at least the exact optimum on the same graph"""
    for seed in range(INSTANCES):
        fg = _feasible(_desk(seed), 10)
        exact = solve_exact(fg)
        greedy = solve_greedy(fg, lam)
        if greedy is None:
            continue
        assert exact is not None
        assert greedy.energy >= exact.energy * (1 - TOLERANCE), seed


def test_feasible_graph_paths_are_feasible():
    """Test every source-to-terminal path of the feasible graph honors every constraint"""
    checked = 0
    for seed in range(30):
        scenario = _desk(seed)
        fg = _feasible(scenario, 10)
        if fg.is_empty:
            continue
        for path in nx.all_simple_paths(fg.graph, fg.source, set(fg.terminals)):
            assert path[-1].depth <= fg.gamma
            cfg = configuration_from_path(fg.app, path, Algorithm.fin_exact)
            assert _honors_constraints(scenario, cfg), (seed, cfg.nodes)
            checked += 1
    assert checked > 0


def test_solver_outputs_pass_evaluation():
    """Test FIN and Opt outputs and feasible-flagged MCP outputs pass evaluation"""
    for seed in range(INSTANCES):
        scenario = _desk(seed)
        fg = _feasible(scenario, 10)
        results = [solve_exact(fg), solve_greedy(fg, 10), solve_opt(scenario, DESK_APP, guard=10 ** 6)]
        mcp = solve_mcp(fg.ext, fg.app)
        if mcp is not None and mcp.feasible:
            results.append(mcp)
        for result in results:
            if result is not None:
                assert _honors_constraints(scenario, result.configuration), (seed, result.configuration)


def test_solvers_are_deterministic():
    """Test repeated solves return identical configurations"""
    for seed in range(10):
        scenario = _desk(seed)
        assert solve_exact(_feasible(scenario, 10)) == solve_exact(_feasible(scenario, 10))
        assert solve_opt(scenario, DESK_APP) == solve_opt(scenario, DESK_APP)


def _survival(app, block_index):
    if block_index == 0:
        return 1.0
    if block_index == len(app.blocks):
        return 0.0
    remaining = 1.0
    for block in app.blocks[:block_index]:
        if block.exit is not None:
            remaining -= block.exit.fraction
    return min(1.0, max(0.0, remaining))


def _naive(scenario, cfg):
    """Straight recomputation of latency and per-inference energies"""
    app = scenario.application(DESK_APP)
    nodes = {node.id: node for node in scenario.nodes}
    links = {(link.source, link.target): link.bandwidth for link in scenario.links}

    latency = comm_pi = compute_pi = 0.0
    previous = app.source_node
    for block_index, node_id in cfg.placements:
        sender, receiver = nodes[previous], nodes[node_id]
        block = app.blocks[block_index - 1]
        ops = block.compute_ops if block.exit is None else block.compute_ops + block.exit.ops
        if block_index == 1:
            bits = app.input_features * app.bits_per_feature
        else:
            bits = app.blocks[block_index - 2].output_features * app.bits_per_feature
        tau = _survival(app, block_index - 1)

        if previous == node_id:
            transfer = comm = 0.0
        else:
            if sender.tier == Tier.source:
                bandwidth = links[(previous, node_id)]
            else:
                bandwidth = min(sender.uplink_capacity, receiver.downlink_capacity, links[(previous, node_id)])
            transfer = bits / bandwidth
            comm = (sender.tx_energy_per_bit + receiver.rx_energy_per_bit) * bits
        latency += transfer + ops / receiver.compute_capacity
        comm_pi += tau * comm
        compute_pi += tau * (receiver.compute_power / receiver.compute_capacity * ops)
        previous = node_id

    rate = app.inference_rate
    return latency, comm_pi, compute_pi, rate * comm_pi + rate * compute_pi


def test_evaluation_matches_naive_recomputation():
    """Test evaluation of 1000 random configurations is exact against a naive recomputation"""
    rng = np.random.default_rng(2024)
    for seed in range(50):
        scenario = _desk(seed)
        for _ in range(20):
            cfg = random_configuration(rng, scenario)
            report = evaluate(scenario, DESK_APP, cfg, 'survival')
            latency, comm_pi, compute_pi, total = _naive(scenario, cfg)
            assert report.latency == latency
            assert report.comm_per_inference == comm_pi
            assert report.compute_per_inference == compute_pi
            assert report.total_energy == total
