"""
Scenario ingestion, validation and resource queries
Loads scenario JSON files (with unit suffixes), checks the model invariants and
answers the per-application bandwidth, compute and traffic questions the graphs need
"""
import json
import logging
import math
from pathlib import Path

from fin.config import get_config
from fin.errors import ScenarioParseError, ScenarioValidationError
from fin.models import (
    Application, DnnBlock, ExitBranch, Link, NetworkNode, Scenario, SliceShare,
    Tier, TrafficMode, parse_enum
)
from fin.units import parse_quantity

logger = logging.getLogger(__name__)

# Declared final-exit fraction may differ from the remainder by this much
EXIT_FRACTION_TOLERANCE = 1e-3

# Allowance for rounding when summing slice fractions
SLICE_SUM_TOLERANCE = 1e-9


def resolve_scenario_path(path):
    """
    Resolve a scenario path, falling back to the bundled data directory

    Args:
        path: File path or bare bundled file name (e.g. 'b_alexnet_cifar10.json')

    Returns:
        Path to an existing file, or the path unchanged if nothing matches
    """
    candidate = Path(path)
    if candidate.exists():
        return candidate

    bundled = get_config().DATA_DIR / candidate.name
    if bundled.exists():
        return bundled

    return candidate


def _read_json(path):
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise ScenarioParseError(f"Scenario file not found: {path}")
    except json.JSONDecodeError as e:
        raise ScenarioParseError(f"Malformed scenario file {path}: {e.msg} (line {e.lineno})")


def _read_raw(path, seen=None):
    """Read a scenario file and merge the file it extends"""
    path = resolve_scenario_path(path)
    seen = set() if seen is None else seen
    key = str(Path(path).resolve())
    if key in seen:
        raise ScenarioParseError(f"Circular 'extends' chain at {path}")
    seen.add(key)

    raw = _read_json(path)
    if not isinstance(raw, dict):
        raise ScenarioParseError(f"Scenario file {path} must contain a JSON object")

    base_name = raw.get('extends')
    if base_name:
        base = _read_raw(Path(path).parent / base_name, seen)
        for section in ('nodes', 'links', 'slices', 'applications'):
            if section not in raw:
                raw[section] = base.get(section, [])

    apps = []
    for entry in raw.get('applications', []):
        if isinstance(entry, dict) and 'base' in entry:
            base_raw = _read_raw(Path(path).parent / entry['base'])
            base_apps = base_raw.get('applications', [])
            if not base_apps:
                raise ScenarioParseError(f"Base file {entry['base']} declares no application")
            merged = dict(base_apps[0])
            merged.update({k: v for k, v in entry.items() if k != 'base'})
            apps.append(merged)
        else:
            apps.append(entry)
    raw['applications'] = apps

    return raw


def _require(data, field, context):
    if field not in data or data[field] is None:
        raise ScenarioValidationError(f"Missing required field: {field} in {context}", context)
    return data[field]


def _fraction(value, context, field):
    number = parse_quantity(value, 'fraction')
    if not 0.0 <= number <= 1.0:
        raise ScenarioValidationError(f"{field} of {context} must lie in [0, 1], got {number}", context)
    return number


def _parse_node(data):
    node_id = str(_require(data, 'id', 'node'))
    try:
        tier = parse_enum(Tier, _require(data, 'tier', node_id))
    except ValueError as e:
        raise ScenarioValidationError(f"{e} for node {node_id}", node_id)

    return NetworkNode(
        id=node_id,
        tier=tier,
        compute_capacity=parse_quantity(data.get('compute_capacity', 0), 'oprate'),
        compute_power=parse_quantity(data.get('compute_power', 0), 'power'),
        idle_power=parse_quantity(data.get('idle_power', 0), 'power'),
        max_power=parse_quantity(data.get('max_power', 0), 'power'),
        uplink_capacity=parse_quantity(data.get('uplink_capacity', 'inf'), 'bitrate', allow_infinite=True),
        downlink_capacity=parse_quantity(data.get('downlink_capacity', 'inf'), 'bitrate', allow_infinite=True),
        tx_energy_per_bit=parse_quantity(data.get('tx_energy_per_bit', 0), 'energy_per_bit'),
        rx_energy_per_bit=parse_quantity(data.get('rx_energy_per_bit', 0), 'energy_per_bit')
    )


def _parse_link(data):
    source = str(_require(data, 'from', 'link'))
    target = str(_require(data, 'to', f'link from {source}'))
    return Link(
        source=source,
        target=target,
        bandwidth=parse_quantity(data.get('bandwidth', 'inf'), 'bitrate', allow_infinite=True)
    )


def _parse_slice(data):
    app_id = str(_require(data, 'application', 'slice'))
    link = data.get('link')
    node = data.get('node')
    if (link is None) == (node is None):
        raise ScenarioValidationError(f"Slice of {app_id} must name exactly one of node or link", app_id)
    if link is not None:
        if not isinstance(link, (list, tuple)) or len(link) != 2:
            raise ScenarioValidationError(f"Slice link of {app_id} must be a [from, to] pair", app_id)
        link = (str(link[0]), str(link[1]))
    context = f"slice {app_id}@{node or '->'.join(link)}"

    return SliceShare(
        application=app_id,
        node=str(node) if node is not None else None,
        link=link,
        compute_fraction=_fraction(data.get('compute_fraction', 1.0), context, 'compute_fraction'),
        bandwidth_fraction=_fraction(data.get('bandwidth_fraction', 1.0), context, 'bandwidth_fraction')
    )


def _parse_blocks(app_id, raw_blocks):
    if not raw_blocks:
        raise ScenarioValidationError(f"Application {app_id} declares no blocks", app_id)

    parsed = []
    for position, data in enumerate(raw_blocks, start=1):
        context = f"{app_id} block {position}"
        exit_data = data.get('exit')
        if isinstance(exit_data, list):
            raise ScenarioValidationError(f"{context} carries more than one exit", app_id)
        parsed.append((position, data, exit_data, context))

    last_position = len(parsed)
    if parsed[-1][2] is None:
        raise ScenarioValidationError(f"Final block of {app_id} must carry an exit", app_id)

    blocks = []
    cumulative = 0.0
    last_exit_index = 0
    for position, data, exit_data, context in parsed:
        exit_branch = None
        if exit_data is not None:
            index = int(_require(exit_data, 'index', context))
            if index <= last_exit_index:
                raise ScenarioValidationError(f"Exit indices of {app_id} must increase, got {index}", app_id)
            last_exit_index = index

            declared = _fraction(_require(exit_data, 'fraction', context), context, 'exit fraction')
            if position == last_position:
                # The final exit captures every remaining sample
                fraction = 1.0 - cumulative
                if abs(declared - fraction) > EXIT_FRACTION_TOLERANCE:
                    raise ScenarioValidationError(
                        f"Exit fractions of {app_id} must sum to 1 "
                        f"(final exit declares {declared}, remainder is {fraction:.6f})", app_id)
                fraction = max(0.0, fraction)
            else:
                fraction = declared
                cumulative += declared
                if cumulative > 1.0 + EXIT_FRACTION_TOLERANCE:
                    raise ScenarioValidationError(f"Exit fractions of {app_id} exceed 1", app_id)

            exit_branch = ExitBranch(
                index=index,
                ops=parse_quantity(exit_data.get('ops', 0), 'ops'),
                fraction=fraction,
                accuracy=_fraction(_require(exit_data, 'accuracy', context), context, 'exit accuracy'),
                features=int(exit_data.get('features', 0))
            )

        blocks.append(DnnBlock(
            index=position,
            output_features=int(_require(data, 'features', context)),
            compute_ops=parse_quantity(_require(data, 'ops', context), 'ops'),
            exit=exit_branch
        ))

    return tuple(blocks)


def _parse_application(data, bits_per_feature):
    app_id = str(_require(data, 'id', 'application'))
    model = _require(data, 'model', app_id)

    return Application(
        id=app_id,
        blocks=_parse_blocks(app_id, model.get('blocks', [])),
        inference_rate=parse_quantity(data.get('rate', 1.0), 'rate'),
        target_accuracy=parse_quantity(_require(data, 'target_accuracy', app_id), 'fraction'),
        target_latency=parse_quantity(_require(data, 'target_latency', app_id), 'time'),
        bits_per_feature=parse_quantity(data.get('bits_per_feature', bits_per_feature), 'bits'),
        source_node=str(_require(data, 'source', app_id)),
        model_name=str(model.get('name', '')),
        input_features=int(model.get('input_features', 0))
    )


def scenario_from_dict(raw, name=''):
    """
    Build and validate a Scenario from a decoded scenario document

    Args:
        raw: Dictionary with nodes, links, slices and applications
        name: Label kept for logging

    Returns:
        Scenario: The validated scenario

    Raises:
        ScenarioValidationError: If any invariant is violated
        UnitError: If a quantity carries an unknown suffix
    """
    bits_per_feature = get_config().BITS_PER_FEATURE

    scenario = Scenario(
        nodes=tuple(_parse_node(item) for item in raw.get('nodes', [])),
        links=tuple(_parse_link(item) for item in raw.get('links', [])),
        slices=tuple(_parse_slice(item) for item in raw.get('slices', [])),
        applications=tuple(_parse_application(item, bits_per_feature) for item in raw.get('applications', [])),
        name=name
    )
    check_scenario(scenario)
    return scenario


def load_scenario(path):
    """
    Load and validate a scenario file

    Args:
        path: Scenario JSON path, or the name of a bundled data file

    Returns:
        Scenario: Validated scenario with quantities in base SI units

    Raises:
        ScenarioParseError: If the file is missing or malformed
        ScenarioValidationError: If an invariant is violated
        UnitError: If a unit suffix is unknown
    """
    raw = _read_raw(path)
    scenario = scenario_from_dict(raw, name=Path(path).stem)
    logger.debug("Loaded scenario %s: %d nodes, %d links, %d applications",
                 scenario.name, len(scenario.nodes), len(scenario.links), len(scenario.applications))
    return scenario


def dump_scenario(scenario, path):
    """Write a scenario in base SI units; reloading it yields an equal scenario"""
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(scenario.to_dict(), handle, indent=2)
        handle.write('\n')


def check_scenario(scenario):
    """
    Check every scenario invariant

    Raises:
        ScenarioValidationError: Naming the first violated invariant and the offending id
    """
    node_ids = set()
    for node in scenario.nodes:
        if node.id in node_ids:
            raise ScenarioValidationError(f"Duplicate node id: {node.id}", node.id)
        node_ids.add(node.id)

        if node.compute_capacity < 0:
            raise ScenarioValidationError(f"Node {node.id} has negative compute capacity", node.id)
        if node.tier == Tier.source and node.compute_capacity != 0:
            raise ScenarioValidationError(
                f"Source node {node.id} must have no compute capacity (declares {node.compute_capacity})", node.id)
        for field in ('compute_power', 'idle_power', 'max_power', 'tx_energy_per_bit', 'rx_energy_per_bit',
                      'uplink_capacity', 'downlink_capacity'):
            if getattr(node, field) < 0:
                raise ScenarioValidationError(f"Node {node.id} has negative {field}", node.id)
        if node.max_power < node.idle_power:
            raise ScenarioValidationError(f"Node {node.id} has max_power below idle_power", node.id)

    for link in scenario.links:
        for endpoint in (link.source, link.target):
            if endpoint not in node_ids:
                raise ScenarioValidationError(f"Link endpoint {endpoint} is not a declared node", endpoint)
        if link.bandwidth < 0:
            raise ScenarioValidationError(f"Link {link.source}->{link.target} has negative bandwidth", link.source)
        if link.source == link.target and not math.isinf(link.bandwidth):
            raise ScenarioValidationError(f"Self loop on {link.source} must have infinite bandwidth", link.source)

    app_ids = set()
    for app in scenario.applications:
        if app.id in app_ids:
            raise ScenarioValidationError(f"Duplicate application id: {app.id}", app.id)
        app_ids.add(app.id)

        if app.inference_rate < 0:
            raise ScenarioValidationError(f"Application {app.id} has a negative inference rate", app.id)
        if not 0.0 < app.target_accuracy <= 1.0:
            raise ScenarioValidationError(f"Application {app.id} target accuracy must lie in (0, 1]", app.id)
        if app.target_latency <= 0:
            raise ScenarioValidationError(f"Application {app.id} target latency must be positive", app.id)
        if app.bits_per_feature <= 0:
            raise ScenarioValidationError(f"Application {app.id} bits_per_feature must be positive", app.id)
        if app.source_node not in node_ids:
            raise ScenarioValidationError(f"Source node {app.source_node} of {app.id} is not declared", app.id)
        if scenario.node(app.source_node).tier not in (Tier.mobile, Tier.source):
            raise ScenarioValidationError(
                f"Source node {app.source_node} of {app.id} must be a mobile or source node", app.id)
        for block in app.blocks:
            if block.compute_ops < 0 or block.output_features < 0:
                raise ScenarioValidationError(f"Block {block.index} of {app.id} has negative size", app.id)

    totals = {}
    for share in scenario.slices:
        if share.application not in app_ids:
            raise ScenarioValidationError(f"Slice references unknown application {share.application}",
                                          share.application)
        endpoints = share.link if share.link else (share.node,)
        for endpoint in endpoints:
            if endpoint not in node_ids:
                raise ScenarioValidationError(f"Slice references unknown node {endpoint}", endpoint)

        compute, bandwidth = totals.get(share.key, (0.0, 0.0))
        totals[share.key] = (compute + share.compute_fraction, bandwidth + share.bandwidth_fraction)

    for key, (compute, bandwidth) in totals.items():
        label = '->'.join(key[1:])
        if compute > 1.0 + SLICE_SUM_TOLERANCE:
            raise ScenarioValidationError(f"Compute slices on {label} sum to {compute:.4g} > 1", label)
        if bandwidth > 1.0 + SLICE_SUM_TOLERANCE:
            raise ScenarioValidationError(f"Bandwidth slices on {label} sum to {bandwidth:.4g} > 1", label)


def validate_scenario(scenario):
    """
    Validate a scenario without raising

    Returns:
        Tuple of (is_valid, error_message)
    """
    try:
        check_scenario(scenario)
    except ScenarioValidationError as e:
        return False, e.message
    return True, None


def _lookup_node(scenario, node_id):
    try:
        return scenario.node(node_id)
    except KeyError:
        raise ScenarioValidationError(f"Unknown node: {node_id}", node_id)


def _lookup_application(scenario, app_id):
    try:
        return scenario.application(app_id)
    except KeyError:
        raise ScenarioValidationError(f"Unknown application: {app_id}", app_id)


def _compute_share(scenario, app_id, node_id):
    for share in scenario.slices:
        if share.application == app_id and share.node == node_id:
            return share.compute_fraction
    return 1.0


def _bandwidth_share(scenario, app_id, n1, n2):
    node_share = None
    for share in scenario.slices:
        if share.application != app_id:
            continue
        if share.link == (n1, n2):
            return share.bandwidth_fraction
        if share.node == n1 and node_share is None:
            node_share = share.bandwidth_fraction
    return 1.0 if node_share is None else node_share


def effective_bandwidth(scenario, app_id, n1, n2):
    """
    Bandwidth from n1 to n2 available to one application

    Args:
        scenario: Scenario
        app_id: Application id
        n1: Sending node id
        n2: Receiving node id

    Returns:
        float: bits/second; infinite on a self loop, 0 when no link is declared
    """
    _lookup_application(scenario, app_id)
    sender = _lookup_node(scenario, n1)
    receiver = _lookup_node(scenario, n2)

    if n1 == n2:
        return math.inf

    link = scenario.link(n1, n2)
    if link is None:
        return 0.0

    if sender.tier == Tier.source:
        # co-located sensors are not limited by the receiving interface
        capacity = link.bandwidth
    else:
        capacity = min(sender.uplink_capacity, receiver.downlink_capacity, link.bandwidth)

    fraction = _bandwidth_share(scenario, app_id, n1, n2)
    if math.isinf(capacity):
        return math.inf if fraction > 0 else 0.0
    return capacity * fraction


def effective_compute(scenario, app_id, node_id):
    """Operations/second of a node available to one application"""
    _lookup_application(scenario, app_id)
    node = _lookup_node(scenario, node_id)
    return node.compute_capacity * _compute_share(scenario, app_id, node_id)


def survival_fraction(app, block_index):
    """
    Fraction of input samples still in flight after a block

    Args:
        app: Application
        block_index: 1-based block index

    Returns:
        float in [0, 1], non-increasing in block_index and 0 after the last block

    Raises:
        ValueError: If block_index is out of range
    """
    if not 1 <= block_index <= len(app.blocks):
        raise ValueError(f"Block index {block_index} out of range for {app.id} (1..{len(app.blocks)})")

    if block_index == len(app.blocks):
        return 0.0

    remaining = 1.0
    for block in app.blocks[:block_index]:
        if block.exit is not None:
            remaining -= block.exit.fraction
    return min(1.0, max(0.0, remaining))


def traversal_fraction(app, tail_block, mode):
    """
    Share of samples that use the edge leaving tail_block

    Args:
        app: Application
        tail_block: Block index at the tail of the edge (0 for the source)
        mode: TrafficMode

    Returns:
        float: survival fraction after tail_block (survival mode), or the
               printed φ of the tail block (literal mode)
    """
    mode = parse_enum(TrafficMode, mode)
    if tail_block == 0:
        return 1.0

    if mode == TrafficMode.survival:
        return survival_fraction(app, tail_block)

    block = app.block(tail_block)
    if block.exit is None:
        return 1.0
    return block.exit.fraction
