"""Perturbation cascades and the scale-free exponent of their sizes.

A cascade is a weakly connected component of the subgraph induced on the
perturbed activities. Exponents come from an unweighted least-squares line
through the log10 complementary CDF, one point per distinct value, and are
reported as the slope magnitude of that CCDF (density exponent minus one).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DegenerateDistribution, EmptyInput, NonPositiveValue
from .network import ActivityNetwork


@dataclass(frozen=True)
class Cascade:
    members: frozenset

    @property
    def size(self) -> int:
        return len(self.members)

    def sorted_members(self) -> list:
        return sorted(self.members)


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    intercept: float
    r_squared: float
    points_used: int


class _DisjointSet:
    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x):
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


def component_labels(network: ActivityNetwork, perturbed: np.ndarray) -> np.ndarray:
    """Component root per node; -1 for nodes outside the perturbed set."""
    perturbed = np.asarray(perturbed, dtype=bool)
    keep = perturbed[network.src] & perturbed[network.dst]
    ds = _DisjointSet(network.node_count)
    for u, v in zip(network.src[keep].tolist(), network.dst[keep].tolist()):
        ds.union(u, v)
    labels = np.full(network.node_count, -1, dtype=np.int64)
    for i in np.flatnonzero(perturbed).tolist():
        labels[i] = ds.find(i)
    return labels


def cascade_sizes(network: ActivityNetwork, perturbed: np.ndarray) -> np.ndarray:
    """Sizes of all cascades, unordered; cheaper than :func:`extract_cascades`."""
    labels = component_labels(network, perturbed)
    labels = labels[labels >= 0]
    if labels.size == 0:
        return np.zeros(0, dtype=np.int64)
    return np.unique(labels, return_counts=True)[1]


def extract_cascades(network: ActivityNetwork, profile) -> list[Cascade]:
    """Cascades sorted by size (largest first), then by smallest member id."""
    labels = component_labels(network, profile.perturbed)
    groups = {}
    for i, lab in enumerate(labels.tolist()):
        if lab >= 0:
            groups.setdefault(lab, []).append(network.ids[i])
    cascades = [Cascade(frozenset(m)) for m in groups.values()]
    cascades.sort(key=lambda c: (-c.size, min(c.members)))
    return cascades


def _values(data) -> np.ndarray:
    data = list(data)
    if data and isinstance(data[0], Cascade):
        data = [c.size for c in data]
    return np.asarray(data, dtype=float)


def ccdf(values: Iterable[float]) -> list[tuple[float, float]]:
    """Points (x, P(X >= x)) for each distinct observed x, ascending."""
    v = _values(values)
    if v.size == 0:
        raise EmptyInput("no values")
    xs, counts = np.unique(v, return_counts=True)
    tail = np.cumsum(counts[::-1])[::-1]
    return [(float(x), float(t) / v.size) for x, t in zip(xs, tail)]


def cascade_size_ccdf(cascades: Sequence[Cascade]) -> list[tuple[int, float]]:
    if not cascades:
        raise EmptyInput("no cascades")
    return [(int(x), p) for x, p in ccdf(c.size for c in cascades)]


def fit_ccdf(points: Sequence[tuple[float, float]]) -> PowerLawFit:
    """OLS of log10 P against log10 x over the given CCDF points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    x, p = pts[:, 0], pts[:, 1]
    if np.any(x <= 0) or np.any(p <= 0):
        raise NonPositiveValue("CCDF points need positive values and probabilities")
    if np.unique(x).size < 2:
        raise DegenerateDistribution("need at least 2 distinct values")
    lx, lp = np.log10(x), np.log10(p)
    mx, mp = lx.mean(), lp.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    sxy = float(np.sum((lx - mx) * (lp - mp)))
    slope = sxy / sxx
    intercept = float(mp - slope * mx)
    resid = lp - (intercept + slope * lx)
    syy = float(np.sum((lp - mp) ** 2))
    r2 = 1.0 - float(resid @ resid) / syy if syy > 0 else 1.0
    return PowerLawFit(exponent=-slope, intercept=intercept,
                       r_squared=min(1.0, max(0.0, r2)), points_used=int(x.size))


def fit_scale_free(values) -> PowerLawFit:
    """Scale-free exponent of raw values (sizes, degrees or :class:`Cascade` s).

    All values must be >= 1 and at least two must differ.
    """
    v = _values(values)
    if v.size == 0:
        raise EmptyInput("no values")
    if np.any(v < 1):
        raise NonPositiveValue("values must be >= 1")
    return fit_ccdf(ccdf(v))
