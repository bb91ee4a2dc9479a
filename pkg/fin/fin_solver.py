"""
Configuration selection on the feasible graph
Exact minimum-energy path by dynamic programming in topological order, and the
greedy lambda-proximity traversal
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from fin.models import Algorithm, Configuration

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveResult:
    """A selected configuration and its expected per-inference energy"""
    configuration: Configuration
    energy: float
    feasible: bool = True
    path: Tuple = ()

    def to_dict(self):
        """Convert result to dictionary"""
        return {
            'configuration': self.configuration.to_dict(),
            'energy_per_inference': self.energy,
            'feasible': self.feasible
        }


def configuration_from_path(app, path, algorithm):
    """
    Map a source-to-exit vertex path back to a Configuration

    Args:
        app: Application
        path: Sequence of Vertex or ReplicaVertex, starting at the source
        algorithm: Algorithm that produced the path

    Returns:
        Configuration
    """
    placements = tuple((v.block, v.node) for v in path if v.block > 0)
    last_block = placements[-1][0]
    exit_branch = app.block(last_block).exit
    if exit_branch is None:
        raise ValueError(f"Path of {app.id} ends on block {last_block}, which has no exit")
    return Configuration(
        application=app.id,
        placements=placements,
        exit_index=exit_branch.index,
        algorithm=algorithm
    )


def selection_key(energy, nodes):
    """Ordering of complete paths: energy, then fewer blocks, then node ids"""
    return energy, len(nodes), nodes


def solve_exact(fg):
    """
    Minimum expected-energy path from the depth-0 source to any terminal replica

    Args:
        fg: FeasibleGraph

    Returns:
        SolveResult, or None when the feasible graph has no path
    """
    if fg.is_empty:
        return None

    # Edges always advance the block index, so (block, depth, node) is topological
    best = {fg.source: (0.0, (), (fg.source,))}
    for vertex in fg.vertices:
        if vertex not in best:
            continue
        energy, nodes, path = best[vertex]
        for head in fg.successors(vertex):
            candidate = (energy + fg.edge(vertex, head)['cost'], nodes + (head.node,))
            current = best.get(head)
            if current is None or candidate < current[:2]:
                best[head] = candidate + (path + (head,),)

    reached = [best[t] for t in fg.terminals if t in best]
    if not reached:
        return None

    energy, nodes, path = min(reached, key=lambda entry: selection_key(entry[0], entry[1]))
    config = configuration_from_path(fg.app, path, Algorithm.fin_exact)
    logger.debug("Exact FIN for %s (gamma=%d): %s via exit %d, %.6g J",
                 fg.application_id, fg.gamma, nodes, config.exit_index, energy)
    return SolveResult(configuration=config, energy=energy, path=path)


def solve_greedy(fg, lam):
    """
    Greedy traversal over lambda-proximity replicas

    From the current replica, the head with minimum edge energy among those with
    depth in [gamma - lambda, gamma] is taken; when that window is empty any head
    is eligible. The walk ends at the first terminal replica.

    Args:
        fg: FeasibleGraph
        lam: Proximity window, 1 <= lam <= gamma

    Returns:
        SolveResult, or None if the graph is empty or the walk gets stuck

    Raises:
        ValueError: If lam is out of range
    """
    if not 1 <= lam <= fg.gamma:
        raise ValueError(f"lambda must lie in [1, {fg.gamma}], got {lam}")

    if fg.is_empty:
        return None

    floor = fg.gamma - lam
    current = fg.source
    path = [current]
    energy = 0.0
    while current not in fg.terminals:
        heads = fg.successors(current)
        if not heads:
            logger.debug("Greedy FIN for %s stuck at %s", fg.application_id, current)
            return None

        window = [h for h in heads if floor <= h.depth <= fg.gamma]
        pool = window or heads
        chosen = min(pool, key=lambda h: (fg.edge(current, h)['cost'], h.node, h.depth))
        energy += fg.edge(current, chosen)['cost']
        path.append(chosen)
        current = chosen

    config = configuration_from_path(fg.app, path, Algorithm.fin_greedy)
    logger.debug("Greedy FIN for %s (gamma=%d, lambda=%d): %s via exit %d, %.6g J",
                 fg.application_id, fg.gamma, lam, config.nodes, config.exit_index, energy)
    return SolveResult(configuration=config, energy=energy, path=tuple(path))
