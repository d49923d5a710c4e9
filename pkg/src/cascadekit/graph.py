"""Structural measures on an activity network: degree, reach, diameter and
node pairs at a fixed downstream distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .exceptions import CycleDetected
from .network import ActivityNetwork, find_cycle, topological_order

DEFAULT_DMAX = 10
REACH_MEMORY_BUDGET = 512 * 2**20  # bytes of bitset state for the reach sweep


@dataclass(frozen=True)
class NodeMetrics:
    """Per-node measures, aligned with ``network.ids``."""

    in_degree: np.ndarray
    out_degree: np.ndarray
    total_degree: np.ndarray
    reach: np.ndarray | None = None

    def rows(self, ids):
        for k, node_id in enumerate(ids):
            yield (node_id, int(self.in_degree[k]), int(self.out_degree[k]),
                   int(self.total_degree[k]),
                   None if self.reach is None else int(self.reach[k]))


@dataclass(frozen=True)
class DistancePairSet:
    """Ordered (source, target) pairs whose shortest directed path has
    exactly ``distance`` edges. ``source``/``target`` hold node indices."""

    distance: int
    source: np.ndarray
    target: np.ndarray

    def __len__(self):
        return int(self.source.size)

    def id_pairs(self, network):
        ids = network.ids
        return [(ids[i], ids[j]) for i, j in zip(self.source.tolist(), self.target.tolist())]


def _check_acyclic(network):
    # networks are validated at construction; this guards hand-built subclasses
    if network.topo_order.size != network.node_count:
        order, leftover = topological_order(network.node_count, network.src, network.dst)
        cyc = find_cycle(network.node_count, network.src, network.dst, leftover)
        raise CycleDetected([network.ids[i] for i in cyc])


def compute_degrees(network: ActivityNetwork) -> NodeMetrics:
    n = network.node_count
    indeg = np.bincount(network.dst, minlength=n).astype(np.int64)
    outdeg = np.bincount(network.src, minlength=n).astype(np.int64)
    return NodeMetrics(in_degree=indeg, out_degree=outdeg, total_degree=indeg + outdeg)


def compute_reach(network: ActivityNetwork, memory_budget: int = REACH_MEMORY_BUDGET) -> np.ndarray:
    """Number of distinct nodes reachable downstream of each node (self excluded).

    Reverse-topological sweep in which each node's descendant set is the union
    of its children's sets plus the children themselves, stored as Python-int
    bitsets. Targets are processed in column blocks sized so the bitsets for
    one block fit ``memory_budget``; one block covers everything below ~70k
    nodes at the default budget.
    """
    _check_acyclic(network)
    n = network.node_count
    block = max(64, min(n, (memory_budget * 8) // max(n, 1)))
    rev = network.topo_order[::-1].tolist()
    ptr = network.out_ptr.tolist()
    idx = network.out_idx.tolist()
    reach = np.zeros(n, dtype=np.int64)
    for lo in range(0, n, block):
        hi = lo + block
        bits = [0] * n
        for u in rev:
            acc = 0
            for k in range(ptr[u], ptr[u + 1]):
                v = idx[k]
                acc |= bits[v]
                if lo <= v < hi:
                    acc |= 1 << (v - lo)
            bits[u] = acc
        reach += np.fromiter((b.bit_count() for b in bits), dtype=np.int64, count=n)
    return reach


def compute_node_metrics(network: ActivityNetwork) -> NodeMetrics:
    deg = compute_degrees(network)
    return NodeMetrics(deg.in_degree, deg.out_degree, deg.total_degree, compute_reach(network))


def longest_path_depth(network: ActivityNetwork) -> np.ndarray:
    """Number of nodes on the longest path ending at each node."""
    _check_acyclic(network)
    depth = [1] * network.node_count
    ptr = network.in_ptr.tolist()
    idx = network.in_idx.tolist()
    for v in network.topo_order.tolist():
        best = 0
        for k in range(ptr[v], ptr[v + 1]):
            if depth[idx[k]] > best:
                best = depth[idx[k]]
        depth[v] = best + 1
    return np.asarray(depth, dtype=np.int64)


def compute_diameter(network: ActivityNetwork) -> int:
    """Activities on a longest directed path; a lone node counts as 1."""
    return int(longest_path_depth(network).max())


def _adjacency(network):
    n = network.node_count
    data = np.ones(network.edge_count, dtype=np.int32)
    return sparse.csr_matrix((data, (network.src, network.dst)), shape=(n, n))


def distance_pairs(network: ActivityNetwork, d_max: int = DEFAULT_DMAX,
                   block: int = 2048) -> dict[int, DistancePairSet]:
    """All pair sets for distances 1..d_max in one truncated breadth-first pass.

    Sources are expanded in blocks: the frontier at distance d is the product
    of the previous frontier with the adjacency matrix, minus everything
    already visited. Pairs are sorted by (source, target).
    """
    if d_max < 1:
        raise ValueError("d_max must be >= 1")
    _check_acyclic(network)
    n = network.node_count
    adj = _adjacency(network)
    found = {d: ([], []) for d in range(1, d_max + 1)}
    for lo in range(0, n, block):
        rows = np.arange(lo, min(n, lo + block))
        frontier = adj[rows]
        visited = frontier.copy()
        for d in range(1, d_max + 1):
            if frontier.nnz == 0:
                break
            coo = frontier.tocoo()
            found[d][0].append(coo.row.astype(np.int64) + lo)
            found[d][1].append(coo.col.astype(np.int64))
            if d == d_max:
                break
            nxt = frontier @ adj
            nxt.data[:] = 1
            nxt = nxt - nxt.multiply(visited)
            nxt.eliminate_zeros()
            visited = visited + nxt
            frontier = nxt
    out = {}
    for d, (srcs, dsts) in found.items():
        s = np.concatenate(srcs) if srcs else np.zeros(0, dtype=np.int64)
        t = np.concatenate(dsts) if dsts else np.zeros(0, dtype=np.int64)
        order = np.lexsort((t, s))
        out[d] = DistancePairSet(d, s[order], t[order])
    return out


def pairs_at_distance(network: ActivityNetwork, d: int) -> DistancePairSet:
    if d < 1:
        raise ValueError("distance must be a positive integer")
    return distance_pairs(network, d)[d]
