"""
Command-line interface
validate, solve, sweep, multiapp, export-graph and evaluate commands over
scenario files; results are written as JSON or CSV
"""
import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from fin.config import get_config
from fin.errors import FinError, InfeasibleError, RunSpecError
from fin.evaluation import evaluate, manual_configuration, preset_configuration, reference_deviation
from fin.experiments import FIN_ALGORITHMS, SweepAxis, is_monotone, run_multi_app, solve, sweep, with_targets
from fin.extended_graph import build_extended_graph, export_dot
from fin.feasible_graph import build_feasible_graph
from fin.models import Algorithm, TrafficMode, parse_enum
from fin.results import write_json, write_results_csv
from fin.scenario import load_scenario

logger = logging.getLogger(__name__)

SOLVER_CHOICES = ('fin-exact', 'fin-greedy', 'mcp', 'opt')


@dataclass
class RunSpec:
    """Everything a command needs, as parsed from the command line"""
    command: str
    scenario: str
    apps: List[str] = field(default_factory=list)
    algorithms: List[Algorithm] = field(default_factory=list)
    gamma: Optional[int] = None
    lam: Optional[int] = None
    mode: Optional[TrafficMode] = None
    alpha: Optional[float] = None
    delta: Optional[float] = None
    out: Optional[str] = None
    seed: Optional[int] = None
    axis: Optional[str] = None
    values: List[float] = field(default_factory=list)
    users: int = 1
    timing: bool = False
    workers: int = 1


def validate_run_spec(spec):
    """
    Validate a run specification

    Returns:
        Tuple of (is_valid, error_message)
    """
    if spec.gamma is not None:
        if spec.gamma < 1:
            return False, f"gamma must be at least 1, got {spec.gamma}"
        if spec.algorithms and not any(a in FIN_ALGORITHMS for a in spec.algorithms):
            return False, "--gamma only applies to fin-exact and fin-greedy"

    if spec.lam is not None:
        if Algorithm.fin_greedy not in spec.algorithms:
            return False, "--lambda only applies to fin-greedy"
        gamma = spec.gamma or get_config().DEFAULT_GAMMA
        if not 1 <= spec.lam <= gamma:
            return False, f"lambda must lie in [1, {gamma}], got {spec.lam}"

    if spec.alpha is not None and not 0 < spec.alpha <= 100:
        return False, f"--alpha is a percentage in (0, 100], got {spec.alpha}"
    if spec.delta is not None and spec.delta <= 0:
        return False, f"--delta must be a positive number of ms, got {spec.delta}"
    if spec.users < 1:
        return False, f"--users must be at least 1, got {spec.users}"
    if spec.workers < 1:
        return False, f"--workers must be at least 1, got {spec.workers}"

    if spec.command == 'sweep':
        if spec.axis is None or not spec.values:
            return False, "sweep needs --axis and --values"
        try:
            axis = parse_enum(SweepAxis, spec.axis)
        except ValueError as e:
            return False, str(e)
        if axis == SweepAxis.gamma and not any(a in FIN_ALGORITHMS for a in spec.algorithms):
            return False, "a gamma sweep needs fin-exact or fin-greedy"
        if axis == SweepAxis.lam and Algorithm.fin_greedy not in spec.algorithms:
            return False, "a lambda sweep needs fin-greedy"
        if axis in (SweepAxis.gamma, SweepAxis.lam) and any(v < 1 or v != int(v) for v in spec.values):
            return False, f"{axis.value} values must be positive integers"
        if not is_monotone(spec.values):
            return False, f"sweep values must be monotone, got {spec.values}"

    return True, None


def _csv_list(text):
    return [item.strip() for item in text.split(',') if item.strip()]


def build_run_spec(args):
    """
    Build a RunSpec from parsed arguments

    Raises:
        RunSpecError: If a value cannot be parsed or the combination is invalid
    """
    try:
        algorithms = [parse_enum(Algorithm, a) for a in _csv_list(getattr(args, 'algo', '') or '')]
        mode = parse_enum(TrafficMode, args.mode) if getattr(args, 'mode', None) else None
        values = [float(v) for v in _csv_list(getattr(args, 'values', '') or '')]
    except ValueError as e:
        raise RunSpecError(str(e))

    if any(a == Algorithm.manual for a in algorithms):
        raise RunSpecError("manual is not a solver; use the evaluate command")

    spec = RunSpec(
        command=args.command,
        scenario=args.scenario,
        apps=_csv_list(getattr(args, 'app', '') or ''),
        algorithms=algorithms,
        gamma=getattr(args, 'gamma', None),
        lam=getattr(args, 'lam', None),
        mode=mode,
        alpha=getattr(args, 'alpha', None),
        delta=getattr(args, 'delta', None),
        out=getattr(args, 'out', None),
        seed=getattr(args, 'seed', None),
        axis=getattr(args, 'axis', None),
        values=values,
        users=getattr(args, 'users', 1),
        timing=getattr(args, 'timing', False),
        workers=getattr(args, 'workers', 1)
    )
    is_valid, error = validate_run_spec(spec)
    if not is_valid:
        raise RunSpecError(error)
    return spec


def _load(spec):
    scenario = load_scenario(spec.scenario)
    targets = spec.apps
    if not targets and len(scenario.applications) == 1:
        targets = [scenario.applications[0].id]
    for app_id in targets:
        scenario = with_targets(
            scenario, app_id,
            delta=spec.delta / 1e3 if spec.delta is not None else None,
            alpha=spec.alpha / 100 if spec.alpha is not None else None
        )
    return scenario


def _single_app(spec, scenario):
    if len(spec.apps) == 1:
        return spec.apps[0]
    if not spec.apps and len(scenario.applications) == 1:
        return scenario.applications[0].id
    raise RunSpecError("Name exactly one application with --app")


def _banner(title):
    print("=" * 60)
    print(title)
    print("=" * 60)


def _print_report(label, cfg, report):
    status = "✓" if report.feasible else "✗"
    print(f"{status} {label}: exit-{report.exit_index} on {', '.join(cfg.nodes)}")
    print(f"  blocks per tier:  {report.tiers}")
    print(f"  latency:          {report.latency * 1e3:.4f} ms (slack {report.latency_slack * 1e3:.4f} ms)")
    print(f"  accuracy:         {report.accuracy * 100:.2f} %")
    print(f"  energy/inference: {report.energy_per_inference * 1e3:.4f} mJ "
          f"(comm {report.comm_per_inference * 1e3:.4f}, compute {report.compute_per_inference * 1e3:.4f})")
    print(f"  energy/second:    {report.total_energy:.6g} J/s")


def cmd_validate(args):
    """Load and validate a scenario, then print a summary"""
    scenario = load_scenario(args.scenario)

    _banner(f"Scenario {scenario.name}")
    print(f"  nodes:        {len(scenario.nodes)} ({', '.join(n.id for n in scenario.nodes)})")
    print(f"  links:        {len(scenario.links)}")
    print(f"  slices:       {len(scenario.slices)}")
    print(f"  applications: {len(scenario.applications)}")
    for app in scenario.applications:
        print(f"    {app.id}: {app.model_name or 'unnamed'}, {len(app.blocks)} blocks, {len(app.exits)} exits")
    print("✓ Scenario is valid")
    return 0


def cmd_solve(args):
    """Solve one application with each requested algorithm"""
    spec = build_run_spec(args)
    scenario = _load(spec)
    app_id = _single_app(spec, scenario)
    algorithms = spec.algorithms or [Algorithm.fin_exact]

    results = []
    infeasible = False
    _banner(f"Solving {app_id} in {scenario.name}")
    for algorithm in algorithms:
        outcome = solve(scenario, app_id, algorithm, spec.gamma, spec.lam, spec.mode, timing=spec.timing)
        entry = {
            'algorithm': algorithm.value,
            'gamma': outcome.gamma,
            'lambda': outcome.lam,
            'feasible': outcome.feasible,
            'wall_ms': outcome.wall_ms,
            'configuration': outcome.result.configuration.to_dict() if outcome.result else None,
            'report': outcome.report.to_dict() if outcome.report else None
        }
        results.append(entry)
        if outcome.result:
            _print_report(algorithm.value, outcome.result.configuration, outcome.report)
        else:
            print(f"✗ {algorithm.value}: no feasible configuration")
        infeasible = infeasible or not outcome.feasible

    if spec.out:
        write_json({'scenario': scenario.name, 'application': app_id, 'results': results}, spec.out)
    return InfeasibleError.exit_code if infeasible else 0


def cmd_sweep(args):
    """Sweep one parameter and write the result CSV"""
    spec = build_run_spec(args)
    scenario = _load(spec)
    app_id = _single_app(spec, scenario)
    algorithms = spec.algorithms or [Algorithm.fin_exact]

    try:
        rows = sweep(scenario, app_id, algorithms, spec.axis, spec.values, spec.gamma, spec.lam,
                     spec.mode, timing=spec.timing, workers=spec.workers)
    except ValueError as e:
        raise RunSpecError(str(e))
    out = spec.out or f"sweep_{app_id}_{spec.axis}.csv"
    count = write_results_csv(rows, out)
    feasible = sum(1 for row in rows if row.feasible)
    print(f"✓ Wrote {count} rows to {out} ({feasible} feasible)")
    return 0


def cmd_multiapp(args):
    """Run the multi-user experiment and write rows plus a summary"""
    spec = build_run_spec(args)
    scenario = _load(spec)
    algorithms = spec.algorithms or [Algorithm.fin_exact, Algorithm.mcp]

    result = run_multi_app(scenario, spec.users, algorithms, seed=spec.seed, gamma=spec.gamma,
                           lam=spec.lam, mode=spec.mode, timing=spec.timing, workers=spec.workers)
    out = Path(spec.out or 'multiapp.csv')
    count = write_results_csv(result.rows, out)
    summary_path = out.with_name(f"{out.stem}_summary.json")
    write_json(result.summary, summary_path)

    _banner(f"Multi-app run: {spec.users} users")
    for algorithm, stats in result.summary['algorithms'].items():
        print(f"  {algorithm}: failure probability {stats['failure_probability']:.3f}, "
              f"exit usage {stats['exit_usage']}")
    if result.summary['energy_gain'] is not None:
        print(f"  energy gain (FIN/MCP): {result.summary['energy_gain']:.3f}")
    print(f"✓ Wrote {count} rows to {out} and summary to {summary_path}")
    return 0


def cmd_export_graph(args):
    """Write the extended graph, or the feasible graph when --gamma is given, as DOT"""
    spec = build_run_spec(args)
    scenario = _load(spec)
    app_id = _single_app(spec, scenario)

    graph = build_extended_graph(scenario, app_id, spec.mode)
    if spec.gamma is not None:
        graph = build_feasible_graph(graph, graph.app, spec.gamma)
    out = spec.out or f"{app_id}.dot"
    export_dot(graph, out)
    print(f"✓ Wrote {len(graph)} vertices to {out}")
    return 0


def cmd_evaluate(args):
    """Evaluate a manual or preset configuration"""
    spec = build_run_spec(args)
    scenario = _load(spec)
    app_id = _single_app(spec, scenario)

    if bool(args.placement) == bool(args.preset):
        raise RunSpecError("Give exactly one of --placement and --preset")
    try:
        if args.preset:
            cfg = preset_configuration(scenario, app_id, args.preset, args.exit)
        else:
            cfg = manual_configuration(scenario, app_id, args.placement.split(','), args.exit)
    except ValueError as e:
        raise RunSpecError(str(e))

    report = evaluate(scenario, app_id, cfg, spec.mode)
    _print_report(args.preset or 'placement', cfg, report)
    deviation = reference_deviation(scenario.application(app_id), args.preset, report) if args.preset else None
    if deviation:
        print(f"  reference:        {deviation['reference_latency_ms']:.4g} ms, "
              f"{deviation['reference_energy_mJ']:.4g} mJ")
        print(f"  deviation_pct:    latency {deviation['latency_deviation_pct']:+.1f} %, "
              f"energy {deviation['energy_deviation_pct']:+.1f} %")
    if spec.out:
        data = {'scenario': scenario.name, 'configuration': cfg.to_dict(), 'report': report.to_dict()}
        if deviation:
            data['reference'] = deviation
        write_json(data, spec.out)
    return 0 if report.feasible else InfeasibleError.exit_code


def _add_common(parser, algo_default=None):
    parser.add_argument('--scenario', required=True, help='Scenario file or bundled scenario name')
    parser.add_argument('--app', default='', help='Application id (comma-separated where several apply)')
    parser.add_argument('--mode', choices=[m.value for m in TrafficMode], help='Traversal-fraction mode')
    parser.add_argument('--alpha', type=float, help='Target accuracy override in %%')
    parser.add_argument('--delta', type=float, help='Target latency override in ms')
    parser.add_argument('--out', help='Output file')
    if algo_default is not None:
        parser.add_argument('--algo', default=algo_default,
                            help=f"Comma-separated algorithms from {', '.join(SOLVER_CHOICES)}")
        parser.add_argument('--gamma', type=int, help='Depth resolution of the feasible graph')
        parser.add_argument('--lambda', dest='lam', type=int, help='Proximity window of fin-greedy')
        parser.add_argument('--timing', action='store_true', help='Record measured solver wall time')


def build_parser():
    """Argument parser with one sub-command per operation"""
    parser = argparse.ArgumentParser(prog='fin', description='Energy-minimal placement of early-exit DNN blocks')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('validate', help='Load and validate a scenario')
    p.add_argument('--scenario', required=True)
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser('solve', help='Solve one application')
    _add_common(p, 'fin-exact')
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser('sweep', help='Sweep delta, alpha, gamma or lambda')
    _add_common(p, 'fin-exact,mcp,opt')
    p.add_argument('--axis', required=True, choices=[a.value for a in SweepAxis])
    p.add_argument('--values', required=True, help='Comma-separated monotone values (ms for delta, %% for alpha)')
    p.add_argument('--workers', type=int, default=1, help='Worker processes')
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser('multiapp', help='Multi-user, multi-application experiment')
    _add_common(p, 'fin-exact,mcp')
    p.add_argument('--users', type=int, default=10)
    p.add_argument('--seed', type=int)
    p.add_argument('--workers', type=int, default=1, help='Worker processes')
    p.set_defaults(handler=cmd_multiapp)

    p = sub.add_parser('export-graph', help='Write the extended or feasible graph as DOT')
    _add_common(p)
    p.add_argument('--gamma', type=int, help='Export the feasible graph at this depth resolution')
    p.set_defaults(handler=cmd_export_graph)

    p = sub.add_parser('evaluate', help='Evaluate a manual or preset configuration')
    _add_common(p)
    p.add_argument('--placement', help='Comma-separated node per block, e.g. mobile,mobile,edge')
    p.add_argument('--preset', choices=['config-1', 'config-2', 'config-3'])
    p.add_argument('--exit', type=int, help='Terminating exit index')
    p.set_defaults(handler=cmd_evaluate)

    return parser


def setup_logging(config=None):
    """Configure root logging from the active configuration"""
    config = config or get_config()
    logging.basicConfig(level=config.LOG_LEVEL, format=config.LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv=None):
    """
    Entry point

    Returns:
        Process exit code: 0 on success, the error's exit code otherwise
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging()

    try:
        return args.handler(args)
    except FinError as e:
        logger.debug("%s", e.to_dict())
        print(f"✗ {e.title}: {e.message}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error("Unexpected error: %s", e, exc_info=True)
        print(f"✗ Unexpected error: {e}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
