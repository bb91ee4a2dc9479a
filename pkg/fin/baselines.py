"""
Baseline placement strategies
MCP picks the minimum auxiliary-weight path on the extended graph and checks
feasibility afterwards; Opt enumerates every placement exhaustively
"""
import logging

from fin.config import get_config
from fin.errors import SearchSpaceError
from fin.evaluation import evaluate
from fin.extended_graph import build_extended_graph
from fin.feasible_graph import violates_rates
from fin.fin_solver import SolveResult, configuration_from_path, selection_key
from fin.models import Algorithm, McpEndpoints, parse_enum

logger = logging.getLogger(__name__)


def accuracy_so_far(app, block_index):
    """Accuracy of the deepest exit at or before a block (0 before the first exit)"""
    accuracy = 0.0
    for block in app.blocks[:block_index]:
        if block.exit is not None:
            accuracy = block.exit.accuracy
    return accuracy


def aux_weight(weights, app, head_block):
    """Auxiliary weight (T + C) / delta + a(head) / alpha of an edge"""
    return weights.latency / app.target_latency + accuracy_so_far(app, head_block) / app.target_accuracy


def solve_mcp(g, app, endpoints=None):
    """
    Minimum auxiliary-weight path on the extended graph

    Args:
        g: ExtendedGraph built for app
        app: Application
        endpoints: McpEndpoints (or name); 'any' (the configured default) ends on
                   every exit, 'qualified' only on exits meeting the accuracy target

    Returns:
        SolveResult whose feasible flag comes from the independent evaluator,
        or None when no exit vertex is reachable
    """
    endpoints = parse_enum(McpEndpoints, endpoints or get_config().MCP_ENDPOINTS)
    targets = g.terminal_vertices if endpoints == McpEndpoints.qualified else g.exit_vertices

    best = {g.source: (0.0, (), (g.source,))}
    for vertex in g.vertices:
        if vertex not in best:
            continue
        omega, nodes, path = best[vertex]
        for head in g.successors(vertex):
            candidate = (omega + aux_weight(g.weights(vertex, head), app, head.block), nodes + (head.node,))
            current = best.get(head)
            if current is None or candidate < current[:2]:
                best[head] = candidate + (path + (head,),)

    reached = [best[t] for t in targets if t in best]
    if not reached:
        logger.debug("MCP for %s reaches no exit", app.id)
        return None

    omega, nodes, path = min(reached, key=lambda entry: selection_key(entry[0], entry[1]))
    energy = 0.0
    for tail, head in zip(path, path[1:]):
        energy += g.weights(tail, head).expected_energy

    config = configuration_from_path(app, path, Algorithm.mcp)
    report = evaluate(g.scenario, app.id, config, g.mode)
    if not report.feasible:
        logger.debug("MCP path %s for %s violates its constraints", nodes, app.id)
    return SolveResult(configuration=config, energy=energy, feasible=report.feasible, path=path)


def opt_candidate_count(host_count, block_count, exit_count):
    """Upper bound on the placements exhaustive search visits"""
    return (host_count ** block_count) * exit_count


def solve_opt(scenario, app_id, mode=None, guard=None):
    """
    Exhaustive minimum-energy search

    Every placement of blocks 1..B(exit) on compute nodes is explored depth first
    with exact latency and rate checks, for every exit meeting the accuracy target.
    Branches whose partial energy already exceeds the best complete one are cut.

    Args:
        scenario: Scenario
        app_id: Application id
        mode: TrafficMode (or name); defaults to configuration
        guard: Maximum candidate count; defaults to FIN_OPT_GUARD

    Returns:
        SolveResult, or None when no placement is feasible

    Raises:
        SearchSpaceError: If the candidate count exceeds the guard
    """
    g = build_extended_graph(scenario, app_id, mode)
    app = g.app
    guard = get_config().OPT_GUARD if guard is None else guard

    hosts = {v.node for v in g.vertices if v.block > 0}
    qualified = [e for e in app.exits if e.accuracy >= app.target_accuracy]
    candidates = opt_candidate_count(len(hosts), len(app.blocks), len(qualified))
    if candidates > guard:
        raise SearchSpaceError(
            f"Exhaustive search for {app_id} would visit {candidates} candidates (guard {guard})", app_id)
    if candidates > guard // 10:
        logger.warning("Exhaustive search for %s visits up to %d candidates (guard %d)", app_id, candidates, guard)

    if not qualified:
        return None

    delta = app.target_latency
    rate = app.inference_rate
    best = None

    def explore(vertex, latency, energy, nodes, path):
        nonlocal best
        # cheapest heads first so the energy bound tightens early
        heads = sorted(g.successors(vertex), key=lambda h: g.weights(vertex, h).expected_energy)
        for head in heads:
            weights = g.weights(vertex, head)
            if violates_rates(weights, rate):
                continue
            reached = latency + weights.latency
            if reached > delta:
                continue
            spent = energy + weights.expected_energy
            if best is not None and spent > best[0]:
                continue
            head_nodes = nodes + (head.node,)
            head_path = path + (head,)
            if head in g.terminal_vertices:
                key = selection_key(spent, head_nodes)
                if best is None or key < selection_key(best[0], best[1]):
                    best = (spent, head_nodes, head_path)
            explore(head, reached, spent, head_nodes, head_path)

    explore(g.source, 0.0, 0.0, (), (g.source,))

    if best is None:
        logger.debug("Exhaustive search for %s found no feasible placement", app_id)
        return None

    energy, nodes, path = best
    config = configuration_from_path(app, path, Algorithm.opt)
    logger.debug("Opt for %s: %s via exit %d, %.6g J", app_id, nodes, config.exit_index, energy)
    return SolveResult(configuration=config, energy=energy, path=path)
