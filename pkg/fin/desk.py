"""
Seeded random desk instances
Small scenarios (one data source, 3-6 compute nodes, one application of 3-8
blocks) for property checks against the exhaustive search
"""
import math

from fin.models import (
    Application, Configuration, Algorithm, DnnBlock, ExitBranch, Link, NetworkNode, Scenario, Tier
)

DESK_APP = 'desk'
DESK_SOURCE = 'sensor'


def _random_nodes(rng, count):
    nodes = [NetworkNode(id=DESK_SOURCE, tier=Tier.source)]
    for i in range(count):
        tier = Tier.mobile if i == 0 else (Tier.edge, Tier.cloud)[int(rng.integers(0, 2))]
        nodes.append(NetworkNode(
            id=f"n{i}",
            tier=tier,
            compute_capacity=float(rng.uniform(1e9, 1e11)),
            compute_power=float(rng.uniform(1.0, 50.0)),
            uplink_capacity=float(rng.uniform(1e7, 1e9)),
            downlink_capacity=float(rng.uniform(1e7, 1e9)),
            tx_energy_per_bit=float(rng.uniform(1e-9, 5e-8)),
            rx_energy_per_bit=float(rng.uniform(1e-9, 5e-8))
        ))
    return nodes


def _random_links(rng, compute_ids):
    links = [Link(source=DESK_SOURCE, target=compute_ids[0], bandwidth=math.inf)]
    for a in compute_ids:
        for b in compute_ids:
            if a != b:
                links.append(Link(source=a, target=b, bandwidth=float(rng.uniform(1e7, 1e9))))
    return links


def _random_blocks(rng, count):
    has_exit = [bool(rng.random() < 0.4) for _ in range(count - 1)] + [True]
    exit_count = sum(has_exit)
    fractions = [float(f) for f in rng.dirichlet([1.0] * exit_count)]
    accuracies = sorted(float(a) for a in rng.uniform(0.3, 0.99, size=exit_count))

    blocks = []
    taken = 0.0
    k = 0
    for i in range(1, count + 1):
        branch = None
        if has_exit[i - 1]:
            fraction = fractions[k] if k < exit_count - 1 else max(0.0, 1.0 - taken)
            taken += fraction
            branch = ExitBranch(
                index=k + 1,
                ops=float(rng.uniform(1e5, 1e7)),
                fraction=fraction,
                accuracy=accuracies[k],
                features=10
            )
            k += 1
        blocks.append(DnnBlock(
            index=i,
            output_features=int(rng.integers(1_000, 100_000)),
            compute_ops=float(rng.uniform(1e6, 5e8)),
            exit=branch
        ))
    return blocks


def random_desk_scenario(rng, node_count=None, block_count=None, name='desk'):
    """
    Random single-application scenario

    The source feeds the first compute node (a mobile) over an infinite link and
    the compute nodes form a full mesh. The accuracy target equals one of the
    exit accuracies and the latency target is drawn around the all-on-mobile latency.

    Args:
        rng: numpy Generator
        node_count: Compute nodes (default: drawn from 3..6)
        block_count: Blocks (default: drawn from 3..8)
        name: Scenario name

    Returns:
        Scenario with one application, id 'desk'
    """
    node_count = int(rng.integers(3, 7)) if node_count is None else node_count
    block_count = int(rng.integers(3, 9)) if block_count is None else block_count

    nodes = _random_nodes(rng, node_count)
    compute_ids = [node.id for node in nodes if node.tier != Tier.source]
    links = _random_links(rng, compute_ids)
    blocks = _random_blocks(rng, block_count)

    exits = [block.exit for block in blocks if block.exit is not None]
    alpha = exits[int(rng.integers(0, len(exits)))].accuracy
    mobile_latency = sum(block.total_ops for block in blocks) / nodes[1].compute_capacity
    delta = mobile_latency * float(rng.uniform(0.3, 1.5))

    app = Application(
        id=DESK_APP,
        blocks=tuple(blocks),
        inference_rate=float(rng.uniform(0.5, 5.0)),
        target_accuracy=alpha,
        target_latency=delta,
        bits_per_feature=32,
        source_node=DESK_SOURCE,
        model_name='random',
        input_features=int(rng.integers(0, 10_000))
    )
    return Scenario(nodes=tuple(nodes), links=tuple(links), applications=(app,), name=name)


def random_configuration(rng, scenario, app_id=DESK_APP):
    """Random structurally valid configuration of a desk application"""
    app = scenario.application(app_id)
    exit_branch = app.exits[int(rng.integers(0, len(app.exits)))]
    last_block = app.exit_block(exit_branch.index)
    compute_ids = [node.id for node in scenario.nodes if node.tier != Tier.source]

    placements = [(1, compute_ids[0])]
    for block in range(2, last_block + 1):
        placements.append((block, compute_ids[int(rng.integers(0, len(compute_ids)))]))

    return Configuration(
        application=app_id,
        placements=tuple(placements),
        exit_index=exit_branch.index,
        algorithm=Algorithm.manual
    )
