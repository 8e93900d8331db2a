"""Passed/waiting list exploration of the zone graph."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import dbm
from ..config import CheckConfig, SearchOrder
from ..errors import BudgetExceeded, RangeError
from .state import CompiledNetwork, Step, SymbolicState

logger = logging.getLogger(__name__)

_PROGRESS_EVERY = 10_000

Key = tuple[tuple[int, ...], tuple[int, ...]]


@dataclass(slots=True)
class Node:
    state: SymbolicState
    parent: int | None
    step: Step | None


@dataclass(slots=True)
class SearchResult:
    """Outcome of one exploration.

    ``hit`` is the node index that matched the goal (or deadlocked, or raised a
    range error), ``None`` when the reachable space was exhausted.
    """

    nodes: list[Node]
    hit: int | None = None
    error: RangeError | None = None
    edges: dict[int, list[tuple[int, Step]]] = field(default_factory=dict)

    @property
    def states_explored(self) -> int:
        return len(self.nodes)

    def path(self, index: int) -> list[Node]:
        chain: list[Node] = []
        cursor: int | None = index
        while cursor is not None:
            node = self.nodes[cursor]
            chain.append(node)
            cursor = node.parent
        chain.reverse()
        return chain

    def path_indices(self, index: int) -> list[int]:
        chain: list[int] = []
        cursor: int | None = index
        while cursor is not None:
            chain.append(cursor)
            cursor = self.nodes[cursor].parent
        chain.reverse()
        return chain


class _Bucket:
    """Maximal zones stored for one discrete key, stacked for the inclusion kernels."""

    __slots__ = ("indices", "zones", "size")

    def __init__(self, dim: int) -> None:
        self.indices: list[int] = []
        self.zones = np.empty((4, dim, dim), dtype=np.int64)
        self.size = 0

    def covering(self, zone: dbm.Dbm) -> int | None:
        position = dbm.first_including(self.zones, self.size, zone)
        return None if position < 0 else self.indices[position]

    def add(self, index: int, zone: dbm.Dbm) -> list[int]:
        """Store ``zone`` and evict the stored zones it includes; returns the evicted nodes."""

        evicted: list[int] = []
        if self.size:
            mask = dbm.included_in(self.zones, self.size, zone)
            if mask.any():
                keep = np.flatnonzero(~mask)
                evicted = [self.indices[k] for k in np.flatnonzero(mask)]
                self.indices = [self.indices[k] for k in keep]
                self.zones[: len(keep)] = self.zones[keep]
                self.size = len(keep)
        if self.size == len(self.zones):
            grown = np.empty((2 * self.size, *self.zones.shape[1:]), dtype=np.int64)
            grown[: self.size] = self.zones[: self.size]
            self.zones = grown
        self.zones[self.size] = zone.matrix
        self.indices.append(index)
        self.size += 1
        return evicted


class Explorer:
    """Breadth- or depth-first search with optional inclusion subsumption."""

    def __init__(self, network: CompiledNetwork, config: CheckConfig) -> None:
        self.network = network
        self.config = config

    def run(
        self,
        goal: Callable[[SymbolicState], bool] | None = None,
        *,
        stop_on_deadlock: bool = False,
        subsumption: bool | None = None,
        record_edges: bool = False,
    ) -> SearchResult:
        """Explore until ``goal`` holds, a deadlock is met, or the space is exhausted.

        With ``record_edges`` the successor graph over stored nodes is kept;
        this forces equality-based storage.
        """

        use_inclusion = self.config.subsumption if subsumption is None else subsumption
        if record_edges:
            use_inclusion = False
        initial = self.network.initial_state()
        result = SearchResult(nodes=[Node(initial, None, None)])
        if goal is not None and goal(initial):
            result.hit = 0
            return result
        exact: dict[tuple[Key, dbm.Dbm], int] = {(initial.key, initial.zone): 0}
        buckets: dict[Key, _Bucket] = {}
        if use_inclusion:
            buckets[initial.key] = _Bucket(initial.zone.dim)
            buckets[initial.key].add(0, initial.zone)
        covered: set[int] = set()
        waiting: deque[int] = deque([0])
        pop = waiting.popleft if self.config.order is SearchOrder.BFS else waiting.pop

        while waiting:
            current = pop()
            if current in covered:
                continue
            state = result.nodes[current].state
            try:
                successors = self.network.successors(state)
            except RangeError as exc:
                result.hit, result.error = current, exc
                return result
            if not successors and stop_on_deadlock:
                result.hit = current
                return result
            targets: list[tuple[int, Step]] = []
            for step, successor in successors:
                known = exact.get((successor.key, successor.zone))
                bucket: _Bucket | None = None
                if known is None and use_inclusion:
                    bucket = buckets.get(successor.key)
                    if bucket is None:
                        bucket = buckets[successor.key] = _Bucket(successor.zone.dim)
                    known = bucket.covering(successor.zone)
                if known is not None:
                    targets.append((known, step))
                    continue
                index = len(result.nodes)
                if index >= self.config.max_states:
                    raise BudgetExceeded(index)
                result.nodes.append(Node(successor, current, step))
                exact[(successor.key, successor.zone)] = index
                if bucket is not None:
                    covered.update(bucket.add(index, successor.zone))
                targets.append((index, step))
                if index % _PROGRESS_EVERY == 0:
                    logger.debug("stored %d states, %d waiting", index, len(waiting))
                if goal is not None and goal(successor):
                    result.hit = index
                    return result
                waiting.append(index)
            if record_edges:
                result.edges[current] = targets
        return result


__all__ = ["Explorer", "Node", "SearchResult"]
