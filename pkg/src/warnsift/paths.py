"""Bounded goal-directed path generation over a control flow graph.

Depth-first search with a canonical successor order (True before False
before Fallthrough before Back, ties by ascending node id) makes the
generated paths deterministic. Loops are bounded by a per-edge budget on
back-edge traversals.
"""

from dataclasses import dataclass, field

from .cfg import BACK
from .errors import TargetUnreachable


@dataclass(frozen=True)
class PathBudget:
    max_back_edge_uses: int = 1
    max_paths: int = 1
    max_length: int = 10000

    def __post_init__(self):
        if self.max_back_edge_uses < 0:
            raise ValueError("max_back_edge_uses must be >= 0")
        if self.max_paths < 1:
            raise ValueError("max_paths must be >= 1")
        if self.max_length < 1:
            raise ValueError("max_length must be >= 1")


@dataclass
class ExecutionPath:
    cfg: object
    node_ids: list = field(default_factory=list)

    def __len__(self):
        return len(self.node_ids)

    def lines(self):
        return [self.cfg.nodes[i].line for i in self.node_ids]


def _iter_paths(cfg, target, budget):
    """Yield entry-to-target node-id paths in canonical DFS order.

    The emitted paths exclude the Entry node. A path may pass through the
    target and reach it again via a loop; every arrival yields a path.
    """
    back_uses = {}
    path = [cfg.entry]
    # Stack of successor iterators paired with the edge that got us there.
    stack = [(iter(cfg.successors(cfg.entry)), None)]
    if cfg.entry == target:
        yield []
    while stack:
        succ_iter, _ = stack[-1]
        edge = next(succ_iter, None)
        if edge is None:
            _, via = stack.pop()
            path.pop()
            if via is not None and via.tag == BACK:
                back_uses[id(via)] -= 1
            continue
        if edge.tag == BACK:
            if back_uses.get(id(edge), 0) >= budget.max_back_edge_uses:
                continue
        if len(path) > budget.max_length:  # path[0] is Entry, not counted
            continue
        path.append(edge.dst)
        if edge.tag == BACK:
            back_uses[id(edge)] = back_uses.get(id(edge), 0) + 1
        stack.append((iter(cfg.successors(edge.dst)), edge))
        if edge.dst == target:
            yield list(path[1:])


def enumerate_paths(cfg, target, budget=PathBudget()):
    """Up to ``budget.max_paths`` distinct entry-to-target paths in
    canonical DFS order."""
    found = []
    seen = set()
    for node_ids in _iter_paths(cfg, target, budget):
        key = tuple(node_ids)
        if key in seen:
            continue
        seen.add(key)
        found.append(ExecutionPath(cfg, node_ids))
        if len(found) >= budget.max_paths:
            break
    if not found:
        raise TargetUnreachable(
            f"node {target} unreachable from entry within the path budget")
    return found


def generate_path(cfg, target, budget=PathBudget()):
    """First canonical path from entry to ``target``."""
    single = PathBudget(budget.max_back_edge_uses, 1, budget.max_length)
    return enumerate_paths(cfg, target, single)[0]
