"""Synthetic activity networks and perturbation scenarios.

Networks grow by preferential attachment along a random topological order:
each arriving activity picks its predecessors among earlier ones with
probability proportional to ``total_degree + offset``, where the offset is
chosen so the total-degree CCDF decays with the requested exponent
(CCDF exponent = 2 + offset / mean_parents). Edges always point from the
earlier to the later activity, so the result is acyclic by construction.

The perturbation models are stylized mechanisms, not fitted to any data:

``uniform_random``  each activity perturbed independently with ``base_rate``.
``inheritance``     in topological order, perturbed with probability ``q`` if
                    any parent is perturbed, else ``base_rate``.
``reach_targeted``  perturbed set as in ``uniform_random``; magnitudes scale
                    with ``(1 + reach) ** reach_exponent``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import InfeasibleConfig
from .graph import compute_reach, longest_path_depth
from .ingest import write_project
from .network import Activity, ActivityNetwork
from .perturbation import PerturbationProfile, apply_profile

MODELS = ("uniform_random", "inheritance", "reach_targeted")
DAG_STREAM, PERTURB_STREAM, CALIBRATION_STREAM = 0, 1, 2


@dataclass(frozen=True)
class GeneratorConfig:
    node_count: int = 5000
    target_degree_exponent: float = 2.0
    mean_parents: float = 1.45
    perturbation_model: str = "uniform_random"
    base_rate: float = 0.2
    inheritance_probability: float = 0.8
    magnitude_mu: float = 1.5  # log-normal magnitude, days
    magnitude_sigma: float = 1.0
    late_fraction: float = 0.8
    reach_exponent: float = 1.0
    planned_mu: float = 2.5  # log-normal planned duration, days
    planned_sigma: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.node_count < 10:
            raise InfeasibleConfig(f"node_count must be >= 10, got {self.node_count}")
        if not 0.0 < self.base_rate < 1.0:
            raise InfeasibleConfig("base_rate must lie in (0, 1)")
        if not 0.0 <= self.inheritance_probability <= 1.0:
            raise InfeasibleConfig("inheritance_probability must lie in [0, 1]")
        if not 0.0 <= self.late_fraction <= 1.0:
            raise InfeasibleConfig("late_fraction must lie in [0, 1]")
        if self.perturbation_model not in MODELS:
            raise InfeasibleConfig(f"perturbation_model must be one of {MODELS}")
        if self.mean_parents < 1.0:
            raise InfeasibleConfig("mean_parents must be >= 1")
        if self.attachment_offset <= -1.0:
            lo = 2.0 - 1.0 / self.mean_parents
            raise InfeasibleConfig(
                f"degree exponent {self.target_degree_exponent} unreachable; must exceed {lo:.3f}")

    @property
    def attachment_offset(self) -> float:
        return (self.target_degree_exponent - 2.0) * self.mean_parents

    def as_dict(self):
        return asdict(self)

    @classmethod
    def for_size(cls, node_count: int, link_count: int, **kwargs) -> "GeneratorConfig":
        """Config whose DAG has exactly ``link_count`` edges (when
        ``node_count - 1 <= link_count <= 2 * node_count - 3``)."""
        mean = 1.0 + (link_count - (node_count - 1)) / (node_count - 2)
        return cls(node_count=node_count, mean_parents=mean, **kwargs)


def _rng(seed, stream):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream])))


def _id_width(n):
    return len(str(n - 1))


def generate_dag(config: GeneratorConfig) -> ActivityNetwork:
    """A scale-free DAG with planned durations and no actual durations yet."""
    rng = _rng(config.seed, DAG_STREAM)
    n = config.node_count
    offset = config.attachment_offset
    base = math.floor(config.mean_parents)
    # an exact count of arrivals (from the third on) takes one extra parent
    n_extra = int(round((config.mean_parents - base) * (n - 2)))
    want = np.full(n, base, dtype=int)
    want[2 + rng.permutation(n - 2)[:n_extra]] += 1

    deg = [0] * n
    endpoints = []
    edges = []
    for t in range(1, n):
        k = min(int(want[t]), t)
        chosen = set()
        if t == 1:
            chosen.add(0)
        while len(chosen) < k:
            if offset >= 0:
                weight_uniform = offset * t
                if rng.random() * (len(endpoints) + weight_uniform) < weight_uniform:
                    cand = int(rng.integers(t))
                else:
                    cand = endpoints[int(rng.integers(len(endpoints)))]
            else:
                cand = endpoints[int(rng.integers(len(endpoints)))]
                if rng.random() * deg[cand] >= deg[cand] + offset:
                    continue
            chosen.add(cand)
        for p in sorted(chosen):
            edges.append((p, t))
            endpoints.append(p)
            endpoints.append(t)
            deg[p] += 1
            deg[t] += 1

    labels = rng.permutation(n)
    w = _id_width(n)
    ids = [f"A{labels[t]:0{w}d}" for t in range(n)]
    planned = np.maximum(1.0, np.rint(rng.lognormal(config.planned_mu, config.planned_sigma, n)))
    acts = sorted((Activity(ids[t], float(planned[t])) for t in range(n)), key=lambda a: a.id)
    return ActivityNetwork(acts, [(ids[u], ids[v]) for u, v in edges])


def _levels(network):
    """Nodes and incoming edges grouped by longest-path depth."""
    depth = longest_path_depth(network)
    top = int(depth.max())
    nodes = [np.flatnonzero(depth == k) for k in range(1, top + 1)]
    edge_depth = depth[network.dst]
    edges = [np.flatnonzero(edge_depth == k) for k in range(1, top + 1)]
    return nodes, edges


def _simulate_inheritance(network, u, q, b, levels=None):
    """Inheritance draws for one or more replicate columns of uniforms ``u``
    (shape ``(n,)`` or ``(n, r)``), processed one depth level at a time."""
    nodes, edges = levels or _levels(network)
    src, dst = network.src, network.dst
    hit = np.zeros(u.shape, dtype=bool)
    for lv, eg in zip(nodes, edges):
        parent_hits = np.zeros(u.shape, dtype=np.int64)
        np.add.at(parent_hits, dst[eg], hit[src[eg]])
        thresh = np.where(parent_hits[lv] > 0, q, b)
        hit[lv] = u[lv] < thresh
    return hit


def inheritance_base_rate(network: ActivityNetwork, q: float, target_rate: float,
                          replicates: int = 32, seed: int = 0, tol: float = 1e-6) -> float:
    """Base rate at which the inheritance model's expected perturbed fraction
    equals ``target_rate``.

    The expectation is a Monte-Carlo average over ``replicates`` draws that
    are held fixed across the bisection, so the estimate is monotone in the
    base rate whenever ``q`` exceeds it.
    """
    if not 0.0 < target_rate < 1.0:
        raise InfeasibleConfig("target rate must lie in (0, 1)")
    levels = _levels(network)
    u = _rng(seed, CALIBRATION_STREAM).random((network.node_count, replicates))

    def expected(b):
        return float(_simulate_inheritance(network, u, q, b, levels).mean())

    lo, hi = 0.0, 1.0
    if not expected(lo) <= target_rate <= expected(hi):
        raise InfeasibleConfig(f"target rate {target_rate} unreachable with q={q}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if expected(mid) < target_rate:
            lo = mid
        else:
            hi = mid
    return min(max(0.5 * (lo + hi), 1e-12), 1 - 1e-12)


def seed_perturbations(network: ActivityNetwork, config: GeneratorConfig) -> PerturbationProfile:
    """Draw a perturbation profile for ``network``; every activity is completed."""
    rng = _rng(config.seed, PERTURB_STREAM)
    n = network.node_count
    # fixed draw order keeps streams aligned across models
    u = rng.random(n)
    mag = np.maximum(1.0, np.rint(rng.lognormal(config.magnitude_mu, config.magnitude_sigma, n)))
    late = rng.random(n) < config.late_fraction

    model = config.perturbation_model
    if model == "inheritance":
        q, b = config.inheritance_probability, config.base_rate
        hit = _simulate_inheritance(network, u, q, b)
    else:
        hit = u < config.base_rate
    if model == "reach_targeted":
        scale = (1.0 + compute_reach(network)) ** config.reach_exponent
        mag = np.maximum(1.0, np.rint(mag * scale))

    planned = network.planned()
    early_room = np.minimum(mag, planned)
    late = late | (early_room <= 0)  # zero-length milestones cannot finish early
    delta = np.where(late, mag, -early_room)
    delta = np.where(hit, delta, 0.0)
    return PerturbationProfile(network.ids, np.ones(n, dtype=bool), delta)


def generate_project(config: GeneratorConfig) -> tuple[ActivityNetwork, PerturbationProfile]:
    """Network with actual durations filled in, and its profile."""
    dag = generate_dag(config)
    profile = seed_perturbations(dag, config)
    return apply_profile(dag, profile), profile


def matched_inheritance_config(network: ActivityNetwork, config: GeneratorConfig,
                               target_rate: float) -> GeneratorConfig:
    b = inheritance_base_rate(network, config.inheritance_probability, target_rate,
                              seed=config.seed)
    return replace(config, perturbation_model="inheritance", base_rate=b)


def write_generated(out_dir, network: ActivityNetwork, config: GeneratorConfig,
                    extra: dict | None = None) -> dict:
    """Write the two project files plus a provenance sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_project(network, out / "activities.csv", out / "dependencies.csv")
    prov = {
        "schema": "cascadekit/provenance v1",
        "tool_version": __version__,
        "generator": "preferential-attachment DAG",
        "perturbation_mechanism": "stylized: " + config.perturbation_model,
        "config": config.as_dict(),
    }
    if extra:
        prov.update(extra)
    (out / "provenance.json").write_text(json.dumps(prov, indent=2, sort_keys=True) + "\n")
    return prov
