"""Counterexample search for leads-to properties.

The full zone graph is built with equality storage. Inside the subgraph of
states that do not satisfy the conclusion we look for a reachable premise
state from which a cycle, a deadlock or unbounded idling is reachable.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum

from .search import SearchResult
from .state import CompiledNetwork, Formula, Step, exists

logger = logging.getLogger(__name__)


class LassoKind(str, Enum):
    CYCLE = "cycle"
    DEADLOCK = "deadlock"
    IDLE = "idle"


@dataclass(frozen=True, slots=True)
class Lasso:
    """Node indices of a counterexample and the steps between them.

    ``loop_start`` is the position in ``nodes`` where the cycle re-enters, for
    ``CYCLE`` lassos only.
    """

    nodes: tuple[int, ...]
    steps: tuple[Step | None, ...]
    kind: LassoKind
    loop_start: int | None = None


def _strongly_connected(
    members: set[int], edges: dict[int, list[tuple[int, Step]]]
) -> list[list[int]]:
    """Iterative Tarjan restricted to ``members``; components in discovery order."""

    index_of: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0
    for root in sorted(members):
        if root in index_of:
            continue
        work: list[tuple[int, int]] = [(root, 0)]
        while work:
            node, position = work.pop()
            if position == 0:
                index_of[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            successors = [t for t, _ in edges.get(node, []) if t in members]
            advanced = False
            for offset in range(position, len(successors)):
                target = successors[offset]
                if target not in index_of:
                    work.append((node, offset + 1))
                    work.append((target, 0))
                    advanced = True
                    break
                if target in on_stack:
                    low[node] = min(low[node], index_of[target])
            if advanced:
                continue
            if low[node] == index_of[node]:
                component: list[int] = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                components.append(component)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return components


def _bfs_path(
    start: int,
    goals: set[int],
    allowed: set[int],
    edges: dict[int, list[tuple[int, Step]]],
    *,
    require_step: bool = False,
) -> list[tuple[int, Step | None]] | None:
    """Shortest path inside ``allowed``; with ``require_step`` the empty path is refused."""

    parents: dict[int, tuple[int, Step] | None] = {}
    queue: deque[int] = deque()
    if not require_step and start in goals:
        return [(start, None)]
    for target, step in edges.get(start, []):
        if target in allowed and target not in parents:
            parents[target] = (start, step)
            queue.append(target)
    while queue:
        node = queue.popleft()
        if node in goals:
            path: list[tuple[int, Step | None]] = []
            cursor = node
            while True:
                link = parents[cursor]
                assert link is not None
                previous, step = link
                path.append((cursor, step))
                if previous == start:
                    break
                cursor = previous
            path.append((start, None))
            path.reverse()
            return path
        for target, step in edges.get(node, []):
            if target in allowed and target not in parents:
                parents[target] = (node, step)
                queue.append(target)
    return None


def find_lasso(
    network: CompiledNetwork, graph: SearchResult, premise: Formula, conclusion: Formula
) -> Lasso | None:
    """Return a counterexample to ``premise --> conclusion`` or ``None``."""

    nodes = graph.nodes
    outside = {i for i, node in enumerate(nodes) if not exists(conclusion, node.state)}
    if not outside:
        return None
    kinds: dict[int, LassoKind] = {}
    for i in sorted(outside):
        if not graph.edges.get(i):
            kinds[i] = LassoKind.DEADLOCK
        elif network.can_idle_forever(nodes[i].state):
            kinds[i] = LassoKind.IDLE
    cyclic: set[int] = set()
    for component in _strongly_connected(outside, graph.edges):
        if len(component) > 1 or any(
            target == component[0] for target, _ in graph.edges.get(component[0], [])
        ):
            cyclic.update(component)
    for i in cyclic:
        kinds.setdefault(i, LassoKind.CYCLE)
    if not kinds:
        return None

    reverse: dict[int, list[int]] = {}
    for source in outside:
        for target, _ in graph.edges.get(source, []):
            if target in outside:
                reverse.setdefault(target, []).append(source)
    bad = set(kinds)
    frontier = deque(kinds)
    while frontier:
        node = frontier.popleft()
        for source in reverse.get(node, []):
            if source not in bad:
                bad.add(source)
                frontier.append(source)

    start = next(
        (i for i in sorted(bad) if exists(premise, nodes[i].state)),
        None,
    )
    if start is None:
        return None
    prefix = graph.path_indices(start)
    prefix_steps: list[Step | None] = [nodes[i].step for i in prefix]
    to_core = _bfs_path(start, set(kinds), bad, graph.edges)
    assert to_core is not None
    indices = prefix + [node for node, _ in to_core[1:]]
    steps = prefix_steps + [step for _, step in to_core[1:]]
    core = indices[-1]
    kind = kinds[core]
    loop_start: int | None = None
    if kind is LassoKind.CYCLE:
        loop = _bfs_path(core, {core}, cyclic, graph.edges, require_step=True)
        assert loop is not None
        loop_start = len(indices) - 1
        indices.extend(node for node, _ in loop[1:])
        steps.extend(step for _, step in loop[1:])
    logger.debug("leads-to counterexample: %s after %d steps", kind.value, len(indices))
    return Lasso(tuple(indices), tuple(steps), kind, loop_start)


__all__ = ["Lasso", "LassoKind", "find_lasso"]
