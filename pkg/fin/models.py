"""
Domain models for the FIN placement solver
Immutable descriptions of the multi-tiered network, the applications and their
early-exit DNN profiles, and the configurations placed on them
"""
import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from fin.units import format_quantity


class Tier(enum.Enum):
    """Network tier enumeration"""
    mobile = "mobile"
    edge = "edge"
    cloud = "cloud"
    source = "source"


# Tiers reported in deployment histograms
COMPUTE_TIERS = (Tier.mobile, Tier.edge, Tier.cloud)


class TrafficMode(enum.Enum):
    """How an edge's energy is weighted by the samples that use it"""
    survival = "survival"
    literal = "literal"


class Algorithm(enum.Enum):
    """Configuration producer enumeration"""
    fin_exact = "fin_exact"
    fin_greedy = "fin_greedy"
    mcp = "mcp"
    opt = "opt"
    manual = "manual"


class McpEndpoints(enum.Enum):
    """Which exit vertices may terminate an MCP path"""
    qualified = "qualified"
    any = "any"


def parse_enum(enum_cls, value):
    """
    Convert a string (case-insensitive, '-' or '_') to an enum member

    Args:
        enum_cls: Enum class to convert into
        value: Enum member or string name/value

    Returns:
        The enum member

    Raises:
        ValueError: If value names no member
    """
    if isinstance(value, enum_cls):
        return value

    key = str(value).strip().lower().replace('-', '_')
    for member in enum_cls:
        if member.value == key or member.name == key:
            return member

    raise ValueError(f"Invalid {enum_cls.__name__}: {value}")


@dataclass(frozen=True)
class NetworkNode:
    """A mobile, edge, cloud or data-source node"""
    id: str
    tier: Tier
    compute_capacity: float = 0.0
    compute_power: float = 0.0
    idle_power: float = 0.0
    max_power: float = 0.0
    uplink_capacity: float = math.inf
    downlink_capacity: float = math.inf
    tx_energy_per_bit: float = 0.0
    rx_energy_per_bit: float = 0.0

    @property
    def energy_per_op(self):
        """Compute energy coefficient in joules per operation"""
        if self.compute_capacity <= 0:
            return 0.0
        return self.compute_power / self.compute_capacity

    def to_dict(self):
        """Convert node to dictionary"""
        return {
            'id': self.id,
            'tier': self.tier.value,
            'compute_capacity': self.compute_capacity,
            'compute_power': self.compute_power,
            'idle_power': self.idle_power,
            'max_power': self.max_power,
            'uplink_capacity': format_quantity(self.uplink_capacity),
            'downlink_capacity': format_quantity(self.downlink_capacity),
            'tx_energy_per_bit': self.tx_energy_per_bit,
            'rx_energy_per_bit': self.rx_energy_per_bit
        }


@dataclass(frozen=True)
class Link:
    """Directed communication link between two nodes"""
    source: str
    target: str
    bandwidth: float = math.inf

    def to_dict(self):
        """Convert link to dictionary"""
        return {
            'from': self.source,
            'to': self.target,
            'bandwidth': format_quantity(self.bandwidth)
        }


@dataclass(frozen=True)
class SliceShare:
    """Portion of a node's compute, or a link's bandwidth, reserved for one application"""
    application: str
    node: Optional[str] = None
    link: Optional[Tuple[str, str]] = None
    compute_fraction: float = 1.0
    bandwidth_fraction: float = 1.0

    @property
    def key(self):
        """Resource the share applies to"""
        return ('link',) + tuple(self.link) if self.link else ('node', self.node)

    def to_dict(self):
        """Convert slice to dictionary"""
        data = {
            'application': self.application,
            'compute_fraction': self.compute_fraction,
            'bandwidth_fraction': self.bandwidth_fraction
        }
        if self.link:
            data['link'] = list(self.link)
        else:
            data['node'] = self.node
        return data


@dataclass(frozen=True)
class ExitBranch:
    """Early-exit classifier attached to a block"""
    index: int
    ops: float
    fraction: float
    accuracy: float
    features: int

    def to_dict(self):
        """Convert exit to dictionary"""
        return {
            'index': self.index,
            'ops': self.ops,
            'fraction': self.fraction,
            'accuracy': self.accuracy,
            'features': self.features
        }


@dataclass(frozen=True)
class DnnBlock:
    """Unit of placement: a backbone section plus at most one exit"""
    index: int
    output_features: int
    compute_ops: float
    exit: Optional[ExitBranch] = None

    @property
    def total_ops(self):
        """Backbone plus exit operations, all executed where the block runs"""
        if self.exit is None:
            return self.compute_ops
        return self.compute_ops + self.exit.ops

    def to_dict(self):
        """Convert block to dictionary"""
        data = {
            'features': self.output_features,
            'ops': self.compute_ops
        }
        if self.exit is not None:
            data['exit'] = self.exit.to_dict()
        return data


@dataclass(frozen=True)
class Application:
    """An inference application and its early-exit DNN"""
    id: str
    blocks: Tuple[DnnBlock, ...]
    inference_rate: float
    target_accuracy: float
    target_latency: float
    bits_per_feature: float
    source_node: str
    model_name: str = ''
    input_features: int = 0

    @property
    def exits(self):
        """Exit branches in block order"""
        return tuple(block.exit for block in self.blocks if block.exit is not None)

    def block(self, index):
        """Block by 1-based index"""
        return self.blocks[index - 1]

    def exit_block(self, exit_index):
        """Index of the block carrying the given exit"""
        for block in self.blocks:
            if block.exit is not None and block.exit.index == exit_index:
                return block.index
        raise ValueError(f"Application {self.id} has no exit {exit_index}")

    def output_bits(self, block_index):
        """Bits leaving a block (block 0 is the raw input)"""
        if block_index == 0:
            return self.input_features * self.bits_per_feature
        return self.block(block_index).output_features * self.bits_per_feature

    def to_dict(self):
        """Convert application to dictionary"""
        return {
            'id': self.id,
            'source': self.source_node,
            'rate': self.inference_rate,
            'target_accuracy': self.target_accuracy,
            'target_latency': self.target_latency,
            'bits_per_feature': self.bits_per_feature,
            'model': {
                'name': self.model_name,
                'input_features': self.input_features,
                'blocks': [block.to_dict() for block in self.blocks]
            }
        }


@dataclass(frozen=True)
class Scenario:
    """Full problem instance: nodes, links, slices and applications"""
    nodes: Tuple[NetworkNode, ...]
    links: Tuple[Link, ...] = ()
    slices: Tuple[SliceShare, ...] = ()
    applications: Tuple[Application, ...] = ()
    name: str = field(default='', compare=False)

    def node(self, node_id):
        """Node by id"""
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)

    def application(self, app_id):
        """Application by id"""
        for app in self.applications:
            if app.id == app_id:
                return app
        raise KeyError(app_id)

    def link(self, source, target):
        """Declared link between two nodes, or None"""
        for link in self.links:
            if link.source == source and link.target == target:
                return link
        return None

    def to_dict(self):
        """Convert scenario to dictionary"""
        return {
            'nodes': [node.to_dict() for node in self.nodes],
            'links': [link.to_dict() for link in self.links],
            'slices': [share.to_dict() for share in self.slices],
            'applications': [app.to_dict() for app in self.applications]
        }


@dataclass(frozen=True)
class Configuration:
    """Placement of consecutive DNN blocks onto nodes, ending at an exit"""
    application: str
    placements: Tuple[Tuple[int, str], ...]
    exit_index: int
    algorithm: Algorithm = Algorithm.manual

    @property
    def nodes(self):
        """Node id per placed block"""
        return tuple(node for _, node in self.placements)

    @property
    def block_count(self):
        return len(self.placements)

    def tier_histogram(self, scenario):
        """Blocks per compute tier"""
        counts = {tier.value: 0 for tier in COMPUTE_TIERS}
        for _, node_id in self.placements:
            tier = scenario.node(node_id).tier
            if tier.value in counts:
                counts[tier.value] += 1
        return counts

    def to_dict(self):
        """Convert configuration to dictionary"""
        return {
            'application': self.application,
            'algorithm': self.algorithm.value,
            'exit': self.exit_index,
            'placements': [{'block': block, 'node': node} for block, node in self.placements]
        }
