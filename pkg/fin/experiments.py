"""
Experiment driver
Single solves with evaluation, parameter sweeps and the multi-user,
multi-application experiment
"""
import enum
import logging
import time
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from fin.baselines import solve_mcp, solve_opt
from fin.config import get_config
from fin.errors import ScenarioValidationError
from fin.evaluation import EvaluationReport, evaluate
from fin.extended_graph import build_extended_graph
from fin.feasible_graph import build_feasible_graph
from fin.fin_solver import SolveResult, solve_exact, solve_greedy
from fin.models import Algorithm, SliceShare, Tier, TrafficMode, parse_enum
from fin.results import ResultRow
from fin.scenario import check_scenario

logger = logging.getLogger(__name__)

FIN_ALGORITHMS = (Algorithm.fin_exact, Algorithm.fin_greedy)


class SweepAxis(enum.Enum):
    """Sweepable parameter; delta values are in ms and alpha values in %"""
    delta = "delta"
    alpha = "alpha"
    gamma = "gamma"
    lam = "lambda"


@dataclass(frozen=True)
class Outcome:
    """A solver run on one application with its independent evaluation"""
    algorithm: Algorithm
    application: str
    gamma: Optional[int]
    lam: Optional[int]
    result: Optional[SolveResult]
    report: Optional[EvaluationReport]
    wall_ms: float = 0.0

    @property
    def feasible(self):
        return self.result is not None and self.result.feasible and self.report.feasible


def with_targets(scenario, app_id, delta=None, alpha=None):
    """
    Copy of the scenario with new latency/accuracy targets for one application

    Args:
        delta: Target latency in seconds, or None to keep
        alpha: Target accuracy as a fraction, or None to keep
    """
    try:
        app = scenario.application(app_id)
    except KeyError:
        raise ScenarioValidationError(f"Unknown application: {app_id}", app_id)

    changes = {}
    if delta is not None:
        changes['target_latency'] = delta
    if alpha is not None:
        changes['target_accuracy'] = alpha
    updated = replace(app, **changes)

    apps = tuple(updated if a.id == app_id else a for a in scenario.applications)
    result = replace(scenario, applications=apps)
    check_scenario(result)
    return result


def solve(scenario, app_id, algorithm, gamma=None, lam=None, mode=None, guard=None,
          endpoints=None, timing=False):
    """
    Run one algorithm on one application and evaluate its configuration

    Args:
        scenario: Scenario
        app_id: Application id
        algorithm: Algorithm (or name)
        gamma: Depth resolution for FIN (default from configuration)
        lam: Proximity window for greedy FIN (default from configuration, else gamma)
        mode: TrafficMode (or name)
        guard: Opt enumeration guard
        endpoints: MCP endpoint policy
        timing: Record measured wall time instead of 0

    Returns:
        Outcome
    """
    cfg = get_config()
    algorithm = parse_enum(Algorithm, algorithm)
    mode = parse_enum(TrafficMode, mode or cfg.DEFAULT_MODE)
    if algorithm in FIN_ALGORITHMS:
        gamma = gamma or cfg.DEFAULT_GAMMA
    else:
        gamma = None
    if algorithm == Algorithm.fin_greedy:
        lam = lam or cfg.DEFAULT_LAMBDA or gamma
    else:
        lam = None

    started = time.perf_counter()
    if algorithm in FIN_ALGORITHMS:
        ext = build_extended_graph(scenario, app_id, mode)
        fg = build_feasible_graph(ext, ext.app, gamma)
        result = solve_exact(fg) if algorithm == Algorithm.fin_exact else solve_greedy(fg, lam)
    elif algorithm == Algorithm.mcp:
        ext = build_extended_graph(scenario, app_id, mode)
        result = solve_mcp(ext, ext.app, endpoints)
    elif algorithm == Algorithm.opt:
        result = solve_opt(scenario, app_id, mode, guard)
    else:
        raise ValueError(f"{algorithm.value} is not a solver")
    elapsed = (time.perf_counter() - started) * 1e3

    report = evaluate(scenario, app_id, result.configuration, mode) if result else None
    outcome = Outcome(
        algorithm=algorithm,
        application=app_id,
        gamma=gamma,
        lam=lam,
        result=result,
        report=report,
        wall_ms=elapsed if timing or cfg.RECORD_WALL_TIME else 0.0
    )
    if not outcome.feasible:
        logger.warning("%s found no feasible configuration for %s", algorithm.value, app_id)
    return outcome


@dataclass(frozen=True)
class _Task:
    """Picklable unit of work for the process pool"""
    scenario: object
    app_id: str
    algorithm: Algorithm
    gamma: Optional[int]
    lam: Optional[int]
    mode: TrafficMode
    guard: Optional[int]
    endpoints: Optional[str]
    timing: bool
    axis: str
    value: float


def _run_task(task):
    outcome = solve(task.scenario, task.app_id, task.algorithm, task.gamma, task.lam,
                    task.mode, task.guard, task.endpoints, task.timing)
    return ResultRow.from_outcome(outcome, task.axis, task.value)


def _run_tasks(tasks, workers):
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_run_task, tasks))
    return [_run_task(task) for task in tasks]


def is_monotone(values):
    """Whether values are non-decreasing or non-increasing"""
    pairs = list(zip(values, values[1:]))
    return all(a <= b for a, b in pairs) or all(a >= b for a, b in pairs)


def sweep(scenario, app_id, algorithms, axis, values, gamma=None, lam=None, mode=None,
          guard=None, endpoints=None, timing=False, workers=None):
    """
    Solve one application for every (algorithm, axis value) pair

    Args:
        scenario: Scenario
        app_id: Application id
        algorithms: Algorithms (or names)
        axis: SweepAxis (or name): 'delta' (ms), 'alpha' (%), 'gamma' or 'lambda'
        values: Non-empty monotone sequence of axis values
        gamma, lam, mode, guard, endpoints, timing: As for solve()
        workers: Process count; rows run serially when None or 1

    Returns:
        List of ResultRow, one per (algorithm, value), in input order

    Raises:
        ValueError: If values are empty or not monotone, or a lambda exceeds gamma
    """
    axis = parse_enum(SweepAxis, axis)
    algorithms = [parse_enum(Algorithm, a) for a in algorithms]
    values = list(values)
    if not values:
        raise ValueError("Sweep needs at least one value")
    if not is_monotone(values):
        raise ValueError(f"Sweep values must be monotone, got {values}")
    mode = parse_enum(TrafficMode, mode or get_config().DEFAULT_MODE)

    tasks = []
    for value in values:
        variant = scenario
        task_gamma = gamma
        task_lam = lam
        if axis == SweepAxis.delta:
            variant = with_targets(scenario, app_id, delta=value / 1e3)
        elif axis == SweepAxis.alpha:
            variant = with_targets(scenario, app_id, alpha=value / 100)
        elif axis == SweepAxis.gamma:
            task_gamma = int(value)
        else:
            task_lam = int(value)
            limit = task_gamma or get_config().DEFAULT_GAMMA
            if not 1 <= task_lam <= limit:
                raise ValueError(f"lambda {task_lam} outside [1, {limit}]")

        for algorithm in algorithms:
            tasks.append(_Task(variant, app_id, algorithm, task_gamma, task_lam, mode, guard,
                               endpoints, timing, axis.value, float(value)))

    logger.info("Sweeping %s over %d values with %d algorithms", axis.value, len(values), len(algorithms))
    return _run_tasks(tasks, workers)


def user_scenario(template, users, uplink_factor=1.0, compute_share=None, bandwidth_share=None):
    """
    Scenario seen by one user of the multi-application experiment

    The user owns the template's mobile and source nodes. Each application gets
    an equal part of the user's mobile, and its edge/cloud slice (the template's,
    else the configured default) is split equally among all users.

    Args:
        template: Scenario with the applications every user runs
        users: Number of users sharing the edge and cloud
        uplink_factor: Multiplier on the mobile uplink capacity
        compute_share: Default per-application edge/cloud compute share
        bandwidth_share: Default per-application edge/cloud bandwidth share (else 1/|apps|)

    Returns:
        Validated Scenario
    """
    cfg = get_config()
    compute_share = cfg.MULTIAPP_COMPUTE_SHARE if compute_share is None else compute_share
    app_count = len(template.applications)
    if bandwidth_share is None:
        bandwidth_share = cfg.MULTIAPP_BANDWIDTH_SHARE or 1.0 / app_count

    nodes = tuple(
        replace(node, uplink_capacity=node.uplink_capacity * uplink_factor) if node.tier == Tier.mobile else node
        for node in template.nodes
    )

    declared = {(s.application, s.node): s for s in template.slices if s.node}
    slices = [s for s in template.slices if s.link]
    for app in template.applications:
        for node in nodes:
            if node.tier == Tier.source:
                continue
            share = declared.get((app.id, node.id))
            if node.tier == Tier.mobile:
                compute = share.compute_fraction if share else 1.0 / app_count
                bandwidth = share.bandwidth_fraction if share else 1.0 / app_count
            else:
                compute = (share.compute_fraction if share else compute_share) / users
                bandwidth = (share.bandwidth_fraction if share else bandwidth_share) / users
            slices.append(SliceShare(application=app.id, node=node.id,
                                     compute_fraction=compute, bandwidth_fraction=bandwidth))

    scenario = replace(template, nodes=nodes, slices=tuple(slices))
    check_scenario(scenario)
    return scenario


@dataclass
class MultiAppResult:
    """Per-user rows and the aggregate statistics of a multi-application run"""
    rows: List[ResultRow]
    summary: Dict = field(default_factory=dict)


def _distribution(counter):
    total = sum(counter.values())
    if total == 0:
        return {}
    return {str(key): count / total for key, count in sorted(counter.items())}


def summarize(rows):
    """
    Aggregate multi-application rows per algorithm

    Returns:
        Dict with, per algorithm, the failure probability (overall and per
        application), the tier deployment and exit usage distributions of the
        feasible configurations and the summed per-inference energy; plus the
        FIN/MCP energy ratio over the (user, application) pairs both solved
    """
    by_algorithm = defaultdict(list)
    for row in rows:
        by_algorithm[row.algorithm].append(row)

    summary = {'algorithms': {}}
    for algorithm, group in sorted(by_algorithm.items()):
        feasible = [r for r in group if r.feasible]
        tiers = Counter()
        exits = Counter()
        per_app = defaultdict(lambda: [0, 0])
        for r in group:
            per_app[r.app][0] += 0 if r.feasible else 1
            per_app[r.app][1] += 1
        for r in feasible:
            tiers.update({'mobile': r.blocks_mobile, 'edge': r.blocks_edge, 'cloud': r.blocks_cloud})
            exits[r.exit] += 1
        summary['algorithms'][algorithm] = {
            'runs': len(group),
            'failure_probability': (len(group) - len(feasible)) / len(group),
            'failure_probability_per_app': {app: fails / runs for app, (fails, runs) in sorted(per_app.items())},
            'tier_deployment': _distribution(Counter({k: v for k, v in tiers.items() if v})),
            'exit_usage': _distribution(exits),
            'total_mJ': sum(r.total_mJ for r in feasible)
        }

    fin_rows = {(r.app, r.value): r for r in by_algorithm.get(Algorithm.fin_exact.value, [])}
    if not fin_rows:
        fin_rows = {(r.app, r.value): r for r in by_algorithm.get(Algorithm.fin_greedy.value, [])}
    mcp_rows = {(r.app, r.value): r for r in by_algorithm.get(Algorithm.mcp.value, [])}
    pairs = [(fin_rows[k], mcp_rows[k]) for k in sorted(fin_rows.keys() & mcp_rows.keys())
             if fin_rows[k].feasible and mcp_rows[k].feasible]
    mcp_total = sum(m.total_mJ for _, m in pairs)
    summary['energy_gain'] = sum(f.total_mJ for f, _ in pairs) / mcp_total if mcp_total > 0 else None
    summary['compared_pairs'] = len(pairs)
    return summary


def run_multi_app(template, users, algorithms, seed=None, gamma=None, lam=None, mode=None,
                  jitter=None, guard=None, endpoints=None, timing=False, workers=None):
    """
    Solve every application of every user with every algorithm

    Args:
        template: Scenario declaring the shared tiers and the applications each user runs
        users: Number of users, at least 1
        algorithms: Algorithms (or names)
        seed: Seed of the uplink jitter draws (default from configuration)
        jitter: Relative mobile uplink jitter in [0, 1) (default from configuration)
        Others as for solve()

    Returns:
        MultiAppResult with rows on axis 'user' (value = user index)
    """
    if users < 1:
        raise ValueError(f"users must be at least 1, got {users}")
    cfg = get_config()
    seed = cfg.DEFAULT_SEED if seed is None else seed
    jitter = cfg.MULTIAPP_JITTER if jitter is None else jitter
    if not 0.0 <= jitter < 1.0:
        raise ValueError(f"jitter must lie in [0, 1), got {jitter}")
    algorithms = [parse_enum(Algorithm, a) for a in algorithms]
    mode = parse_enum(TrafficMode, mode or cfg.DEFAULT_MODE)

    rng = np.random.default_rng(seed)
    factors = rng.uniform(1.0 - jitter, 1.0 + jitter, size=users)

    tasks = []
    for user in range(users):
        scenario = user_scenario(template, users, float(factors[user]))
        for app in template.applications:
            for algorithm in algorithms:
                tasks.append(_Task(scenario, app.id, algorithm, gamma, lam, mode, guard,
                                   endpoints, timing, 'user', float(user)))

    logger.info("Multi-app run: %d users, %d applications, %d algorithms",
                users, len(template.applications), len(algorithms))
    rows = _run_tasks(tasks, workers)
    return MultiAppResult(rows=rows, summary=summarize(rows))
