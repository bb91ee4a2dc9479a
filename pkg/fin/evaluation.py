"""
Independent evaluation of configurations
Recomputes latency, accuracy, rate usage and energy of a configuration directly
from the scenario, without reading any solver-side graph weights
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict

from fin.config import get_config
from fin.errors import ScenarioValidationError
from fin.models import Algorithm, Configuration, Tier, TrafficMode, parse_enum
from fin.scenario import effective_bandwidth, effective_compute, traversal_fraction

logger = logging.getLogger(__name__)

# Block ranges of the example deployments: tier per 1-based block, last tier repeats
PRESETS = {
    'config-1': (Tier.mobile,),
    'config-2': (Tier.mobile, Tier.mobile, Tier.edge),
    'config-3': (Tier.mobile, Tier.mobile, Tier.edge, Tier.edge, Tier.cloud),
}

# Published all-on-mobile measurements: (model, preset, exit) -> (latency s, energy per inference J)
REFERENCE_POINTS = {
    ('B-AlexNet/CIFAR10', 'config-1', 3): (6.56e-3, 39.4e-3),
    ('B-AlexNet/CIFAR10', 'config-1', 1): (2.67e-3, 16.4e-3),
}


@dataclass(frozen=True)
class EvaluationReport:
    """Energy, latency, accuracy and constraint verdicts of one configuration"""
    application: str
    exit_index: int
    comm_energy: float
    compute_energy: float
    total_energy: float
    energy_per_inference: float
    comm_per_inference: float
    compute_per_inference: float
    latency: float
    accuracy: float
    latency_ok: bool
    accuracy_ok: bool
    bandwidth_ok: bool
    compute_ok: bool
    latency_slack: float
    accuracy_slack: float
    bandwidth_slack: float
    compute_slack: float
    tiers: Dict[str, int] = field(default_factory=dict)

    @property
    def feasible(self):
        return self.latency_ok and self.accuracy_ok and self.bandwidth_ok and self.compute_ok

    def to_dict(self):
        """Convert report to dictionary"""
        return {
            'application': self.application,
            'exit': self.exit_index,
            'feasible': self.feasible,
            'energy': {
                'total_J_per_s': self.total_energy,
                'comm_J_per_s': self.comm_energy,
                'compute_J_per_s': self.compute_energy,
                'per_inference_mJ': self.energy_per_inference * 1e3,
                'comm_per_inference_mJ': self.comm_per_inference * 1e3,
                'compute_per_inference_mJ': self.compute_per_inference * 1e3
            },
            'latency_ms': self.latency * 1e3,
            'accuracy_pct': self.accuracy * 100,
            'constraints': {
                'latency': {'ok': self.latency_ok, 'slack': self.latency_slack},
                'accuracy': {'ok': self.accuracy_ok, 'slack': self.accuracy_slack},
                'bandwidth': {'ok': self.bandwidth_ok, 'slack': self.bandwidth_slack},
                'compute': {'ok': self.compute_ok, 'slack': self.compute_slack}
            },
            'blocks_per_tier': dict(self.tiers)
        }


def _check_structure(scenario, app, cfg):
    """Raise ScenarioValidationError for a malformed configuration"""
    if cfg.application != app.id:
        raise ScenarioValidationError(
            f"Configuration is for {cfg.application}, not {app.id}", cfg.application)
    if not cfg.placements:
        raise ScenarioValidationError(f"Configuration of {app.id} places no blocks", app.id)

    try:
        last_block = app.exit_block(cfg.exit_index)
    except ValueError as e:
        raise ScenarioValidationError(str(e), app.id)

    blocks = [block for block, _ in cfg.placements]
    if blocks != list(range(1, last_block + 1)):
        raise ScenarioValidationError(
            f"Configuration of {app.id} must place blocks 1..{last_block} in order, got {blocks}", app.id)

    for block, node_id in cfg.placements:
        try:
            scenario.node(node_id)
        except KeyError:
            raise ScenarioValidationError(f"Block {block} of {app.id} placed on unknown node {node_id}", node_id)
        if effective_compute(scenario, app.id, node_id) <= 0:
            raise ScenarioValidationError(
                f"Block {block} of {app.id} placed on {node_id}, which has no compute for it", node_id)


def evaluate(scenario, app_id, cfg, mode=None):
    """
    Evaluate a configuration against the scenario

    Args:
        scenario: Scenario
        app_id: Application id
        cfg: Configuration to evaluate
        mode: TrafficMode (or name); defaults to the configured mode

    Returns:
        EvaluationReport; energies are per second of stream (sigma times per-inference)

    Raises:
        ScenarioValidationError: If the application is unknown or the configuration
            is malformed (non-consecutive blocks, unknown node, missing link)
    """
    mode = parse_enum(TrafficMode, mode or get_config().DEFAULT_MODE)
    try:
        app = scenario.application(app_id)
    except KeyError:
        raise ScenarioValidationError(f"Unknown application: {app_id}", app_id)
    _check_structure(scenario, app, cfg)

    rate = app.inference_rate
    latency = 0.0
    comm_pi = 0.0
    compute_pi = 0.0
    bandwidth_slack = math.inf
    compute_slack = math.inf

    previous = app.source_node
    for block_index, node_id in cfg.placements:
        sender = scenario.node(previous)
        receiver = scenario.node(node_id)
        bandwidth = effective_bandwidth(scenario, app_id, previous, node_id)
        if bandwidth <= 0:
            raise ScenarioValidationError(
                f"No link from {previous} to {node_id} for block {block_index} of {app_id}", node_id)
        compute = effective_compute(scenario, app_id, node_id)

        data_bits = app.output_bits(block_index - 1)
        ops = app.block(block_index).total_ops
        tau = traversal_fraction(app, block_index - 1, mode)

        if previous == node_id:
            transfer = 0.0
            comm = 0.0
        else:
            transfer = data_bits / bandwidth
            comm = (sender.tx_energy_per_bit + receiver.rx_energy_per_bit) * data_bits
        latency += transfer + ops / compute

        comm_pi += tau * comm
        compute_pi += tau * (receiver.energy_per_op * ops)

        bandwidth_slack = min(bandwidth_slack, bandwidth - rate * tau * data_bits)
        compute_slack = min(compute_slack, compute - rate * tau * ops)
        previous = node_id

    accuracy = app.block(cfg.placements[-1][0]).exit.accuracy
    comm_energy = rate * comm_pi
    compute_energy = rate * compute_pi

    report = EvaluationReport(
        application=app_id,
        exit_index=cfg.exit_index,
        comm_energy=comm_energy,
        compute_energy=compute_energy,
        total_energy=comm_energy + compute_energy,
        energy_per_inference=comm_pi + compute_pi,
        comm_per_inference=comm_pi,
        compute_per_inference=compute_pi,
        latency=latency,
        accuracy=accuracy,
        latency_ok=latency <= app.target_latency,
        accuracy_ok=accuracy >= app.target_accuracy,
        bandwidth_ok=bandwidth_slack >= 0,
        compute_ok=compute_slack >= 0,
        latency_slack=app.target_latency - latency,
        accuracy_slack=accuracy - app.target_accuracy,
        bandwidth_slack=bandwidth_slack,
        compute_slack=compute_slack,
        tiers=cfg.tier_histogram(scenario)
    )

    if not report.feasible:
        logger.debug("Configuration %s of %s violates its constraints", cfg.nodes, app_id)
    return report


def _first_node(scenario, tier):
    for node in scenario.nodes:
        if node.tier == tier:
            return node.id
    raise ScenarioValidationError(f"Scenario has no {tier.value} node")


def preset_configuration(scenario, app_id, name, exit_index=None):
    """
    Build one of the example deployments, truncated at an exit

    Args:
        scenario: Scenario
        app_id: Application id
        name: 'config-1' (all mobile), 'config-2' (blocks 1-2 mobile, rest edge)
              or 'config-3' (blocks 1-2 mobile, 3-4 edge, rest cloud)
        exit_index: Terminating exit; defaults to the final exit

    Returns:
        Configuration tagged as manual

    Raises:
        ValueError: If the preset name is unknown
        ScenarioValidationError: If the application, exit or a needed tier is missing
    """
    key = str(name).strip().lower()
    if key not in PRESETS:
        raise ValueError(f"Unknown preset: {name} (choose from {', '.join(PRESETS)})")

    try:
        app = scenario.application(app_id)
    except KeyError:
        raise ScenarioValidationError(f"Unknown application: {app_id}", app_id)

    if exit_index is None:
        exit_index = app.exits[-1].index
    try:
        last_block = app.exit_block(exit_index)
    except ValueError as e:
        raise ScenarioValidationError(str(e), app_id)

    tiers = PRESETS[key]
    placements = []
    for block in range(1, last_block + 1):
        tier = tiers[min(block, len(tiers)) - 1]
        placements.append((block, _first_node(scenario, tier)))

    return Configuration(
        application=app_id,
        placements=tuple(placements),
        exit_index=exit_index,
        algorithm=Algorithm.manual
    )


def manual_configuration(scenario, app_id, nodes, exit_index=None):
    """Configuration placing block i on nodes[i-1]; the exit defaults to the one on the last placed block"""
    try:
        app = scenario.application(app_id)
    except KeyError:
        raise ScenarioValidationError(f"Unknown application: {app_id}", app_id)

    nodes = [n.strip() for n in nodes if n.strip()]
    if not nodes:
        raise ScenarioValidationError(f"Empty placement for {app_id}", app_id)
    if exit_index is None:
        if len(nodes) > len(app.blocks) or app.block(len(nodes)).exit is None:
            raise ScenarioValidationError(
                f"Placement of {len(nodes)} blocks does not end on an exit of {app_id}", app_id)
        exit_index = app.block(len(nodes)).exit.index

    return Configuration(
        application=app_id,
        placements=tuple((i, node) for i, node in enumerate(nodes, start=1)),
        exit_index=exit_index,
        algorithm=Algorithm.manual
    )


def deviation_pct(achieved, reference):
    """Signed deviation of achieved from reference, in percent of the reference"""
    return (achieved - reference) / reference * 100.0


def reference_deviation(app, preset, report):
    """
    Compare an evaluated preset with its published measurement

    Returns:
        Dict with the reference latency (ms) and energy (mJ) and the deviation
        of the report from each, or None when no reference exists
    """
    reference = REFERENCE_POINTS.get((app.model_name, str(preset).strip().lower(), report.exit_index))
    if reference is None:
        return None
    latency, energy = reference
    return {
        'reference_latency_ms': latency * 1e3,
        'reference_energy_mJ': energy * 1e3,
        'latency_deviation_pct': deviation_pct(report.latency, latency),
        'energy_deviation_pct': deviation_pct(report.energy_per_inference, energy)
    }
