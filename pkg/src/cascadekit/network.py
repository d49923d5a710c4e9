"""Activity, dependency and the immutable directed activity network."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .exceptions import (
    CycleDetected,
    DanglingEdgeEndpoint,
    DuplicateActivityId,
    EmptyProject,
    MalformedRow,
)


class Status(str, Enum):
    COMPLETED = "completed"
    INCOMPLETE = "incomplete"


@dataclass(frozen=True)
class Activity:
    """One schedule task. Durations are in days (an abstract unit; calendar vs
    working days is left to whoever exported the schedule)."""

    id: str
    planned_duration: float
    actual_duration: float | None = None
    name: str | None = None

    def __post_init__(self):
        if not self.id:
            raise MalformedRow("empty activity id")
        for label, value in (("planned_duration", self.planned_duration),
                             ("actual_duration", self.actual_duration)):
            if value is None:
                continue
            if not math.isfinite(value) or value < 0:
                raise MalformedRow(f"{label} must be a finite non-negative number, got {value!r}")

    @property
    def status(self) -> Status:
        return Status.INCOMPLETE if self.actual_duration is None else Status.COMPLETED

    @property
    def completed(self) -> bool:
        return self.actual_duration is not None


@dataclass(frozen=True)
class Dependency:
    predecessor: str
    successor: str


def _csr(n, keys, values):
    order = np.argsort(keys, kind="stable")
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(keys, minlength=n), out=ptr[1:])
    return ptr, values[order].astype(np.int64)


def _readonly(a):
    a.setflags(write=False)
    return a


def topological_order(n, src, dst):
    """Kahn's algorithm over integer edge arrays.

    Returns ``(order, leftover)``; ``leftover`` is empty iff the graph is acyclic.
    Ties are broken by node index so the order is deterministic.
    """
    out_ptr, out_idx = _csr(n, src, dst)
    indeg = np.bincount(dst, minlength=n).astype(np.int64)
    queue = deque(np.flatnonzero(indeg == 0).tolist())
    order = []
    indeg = indeg.tolist()
    out_ptr = out_ptr.tolist()
    out_idx = out_idx.tolist()
    while queue:
        u = queue.popleft()
        order.append(u)
        for k in range(out_ptr[u], out_ptr[u + 1]):
            v = out_idx[k]
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    leftover = [i for i in range(n) if indeg[i] > 0]
    return np.asarray(order, dtype=np.int64), leftover


def find_cycle(n, src, dst, candidates):
    """Return one directed cycle (list of node indices) among ``candidates``.

    Every candidate left over by Kahn's algorithm has a predecessor that is
    also a candidate, so walking predecessors must revisit a node.
    """
    cand = set(candidates)
    pred = {}
    for u, v in zip(src.tolist(), dst.tolist()):
        if u in cand and v in cand and v not in pred:
            pred[v] = u
    start = min(cand)
    seen = {}
    walk = []
    node = start
    while node not in seen:
        seen[node] = len(walk)
        walk.append(node)
        node = pred[node]
    cycle = walk[seen[node]:]
    cycle.reverse()
    # rotate so the cycle starts at its lowest index (first in input order)
    k = cycle.index(min(cycle))
    return cycle[k:] + cycle[:k]


@dataclass
class IngestLog:
    """Row accounting for one parse: rows_in == accepted + warned + errored."""

    rows_in: int = 0
    accepted: int = 0
    warned: int = 0
    errored: int = 0
    warnings: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def balanced(self) -> bool:
        return self.rows_in == self.accepted + self.warned + self.errored


class ActivityNetwork:
    """Directed acyclic dependency graph over activities.

    An edge ``(p, s)`` means activity ``p`` must finish before ``s`` starts.
    Nodes are addressed either by id or by their integer position in the
    input order (``index``); all numeric arrays use the positional index.
    The instance is immutable after construction.
    """

    def __init__(
        self,
        activities: Sequence[Activity],
        edges: Iterable[tuple[str, str] | Dependency],
        *,
        allow_cycles: bool = False,
        source: str | None = None,
    ):
        if not activities:
            raise EmptyProject(f"{source or '<input>'}: project has no activities")
        index = {}
        for a in activities:
            if a.id in index:
                raise DuplicateActivityId(f"duplicate activity id {a.id!r}", source=source)
            index[a.id] = len(index)
        self._ids = tuple(a.id for a in activities)
        self._index = index
        self._activities = {a.id: a for a in activities}

        pairs = []
        seen = set()
        self.duplicate_edges = 0
        for e in edges:
            p, s = (e.predecessor, e.successor) if isinstance(e, Dependency) else e
            for end in (p, s):
                if end not in index:
                    raise DanglingEdgeEndpoint(f"edge {p}->{s} names unknown activity {end!r}",
                                               source=source)
            if p == s:
                raise MalformedRow(f"self-loop on activity {p!r}", source=source)
            key = (index[p], index[s])
            if key in seen:
                self.duplicate_edges += 1
                continue
            seen.add(key)
            pairs.append(key)

        n = len(self._ids)
        src = np.fromiter((p for p, _ in pairs), dtype=np.int64, count=len(pairs))
        dst = np.fromiter((s for _, s in pairs), dtype=np.int64, count=len(pairs))

        order, leftover = topological_order(n, src, dst)
        self.removed_edges: list[tuple[str, str]] = []
        if leftover:
            if not allow_cycles:
                cycle = find_cycle(n, src, dst, leftover)
                raise CycleDetected([self._ids[i] for i in cycle], source=source)
            src, dst, removed = _drop_feedback_edges(n, src, dst)
            self.removed_edges = [(self._ids[u], self._ids[v]) for u, v in removed]
            order, leftover = topological_order(n, src, dst)
            assert not leftover

        self.src = _readonly(src)
        self.dst = _readonly(dst)
        out_ptr, out_idx = _csr(n, src, dst)
        in_ptr, in_idx = _csr(n, dst, src)
        self.out_ptr, self.out_idx = _readonly(out_ptr), _readonly(out_idx)
        self.in_ptr, self.in_idx = _readonly(in_ptr), _readonly(in_idx)
        self.topo_order = _readonly(order)
        self.source = source

    @property
    def ids(self) -> tuple[str, ...]:
        return self._ids

    @property
    def activities(self) -> dict[str, Activity]:
        return dict(self._activities)

    def activity(self, node_id: str) -> Activity:
        return self._activities[node_id]

    def index(self, node_id: str) -> int:
        return self._index[node_id]

    @property
    def node_count(self) -> int:
        return len(self._ids)

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    @property
    def edges(self) -> list[Dependency]:
        ids = self._ids
        return [Dependency(ids[u], ids[v]) for u, v in zip(self.src.tolist(), self.dst.tolist())]

    def edge_pairs(self) -> set[tuple[str, str]]:
        return {(e.predecessor, e.successor) for e in self.edges}

    def successors(self, node_id: str) -> list[str]:
        i = self._index[node_id]
        return [self._ids[j] for j in self.out_idx[self.out_ptr[i]:self.out_ptr[i + 1]]]

    def predecessors(self, node_id: str) -> list[str]:
        i = self._index[node_id]
        return [self._ids[j] for j in self.in_idx[self.in_ptr[i]:self.in_ptr[i + 1]]]

    def completed_mask(self) -> np.ndarray:
        return np.array([self._activities[i].completed for i in self._ids], dtype=bool)

    def planned(self) -> np.ndarray:
        return np.array([self._activities[i].planned_duration for i in self._ids], dtype=float)

    def actual(self) -> np.ndarray:
        """Actual durations with NaN for incomplete activities."""
        return np.array([np.nan if (a := self._activities[i].actual_duration) is None else a
                         for i in self._ids], dtype=float)

    def __repr__(self):
        return f"ActivityNetwork(nodes={self.node_count}, edges={self.edge_count})"


def _drop_feedback_edges(n, src, dst):
    """Remove an inclusion-minimal set of edges that breaks every cycle.

    Greedy: drop the closing edge of one concrete cycle at a time, then try to
    restore each dropped edge (latest first) if doing so keeps the graph acyclic.
    """
    keep = np.ones(src.size, dtype=bool)
    edge_pos = {}
    for k, (u, v) in enumerate(zip(src.tolist(), dst.tolist())):
        edge_pos[(u, v)] = k
    dropped = []
    while True:
        _, leftover = topological_order(n, src[keep], dst[keep])
        if not leftover:
            break
        cycle = find_cycle(n, src[keep], dst[keep], leftover)
        k = edge_pos[(cycle[-1], cycle[0])]
        keep[k] = False
        dropped.append(k)
    for k in reversed(dropped):
        keep[k] = True
        _, leftover = topological_order(n, src[keep], dst[keep])
        if leftover:
            keep[k] = False
    removed = [(int(src[k]), int(dst[k])) for k in sorted(np.flatnonzero(~keep).tolist())]
    return src[keep], dst[keep], removed
