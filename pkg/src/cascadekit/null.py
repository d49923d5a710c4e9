"""Distance cross-correlation, fragility correlations and shuffle null ensembles.

Random streams are PCG64 generators seeded from ``SeedSequence((seed, k))``
so sample ``k`` of an ensemble is the same whether samples run serially or
in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .cascade import cascade_sizes, fit_scale_free
from .exceptions import CascadeKitError, ComputationError, InsufficientData, ZeroVariance
from .graph import DEFAULT_DMAX, NodeMetrics, compute_node_metrics, distance_pairs
from .network import ActivityNetwork
from .perturbation import PerturbationProfile
from .stats import CorrelationResult, pearson, spearman

STATISTICS = ("cross_correlation", "cascade_exponent", "fragility")
DEFAULT_SAMPLES = 50


def sample_rng(seed: int, index: int | None = None) -> np.random.Generator:
    entropy = [int(seed)] if index is None else [int(seed), int(index)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


# -- distance cross-correlation ---------------------------------------------

@dataclass(frozen=True)
class DistanceCorrelationRow:
    d: int
    c_value: float | None
    pair_count: int
    reason: str | None = None  # why c_value is undefined
    null_mean: float | None = None
    null_sd: float | None = None


@dataclass(frozen=True)
class DistanceCorrelation:
    rows: tuple

    def values(self) -> np.ndarray:
        return np.array([np.nan if r.c_value is None else r.c_value for r in self.rows])

    def __getitem__(self, d) -> DistanceCorrelationRow:
        return self.rows[d - 1]

    def with_null(self, ensemble: "NullEnsemble") -> "DistanceCorrelation":
        rows = []
        for r in self.rows:
            k = ensemble.labels.index(f"d={r.d}")
            mean, sd = ensemble.mean[k], ensemble.sd[k]
            rows.append(replace(r, null_mean=None if np.isnan(mean) else float(mean),
                                null_sd=None if np.isnan(sd) else float(sd)))
        return DistanceCorrelation(tuple(rows))


def _usable(pairs, completed):
    out = {}
    for d, ps in pairs.items():
        ok = completed[ps.source] & completed[ps.target]
        out[d] = (ps.source[ok], ps.target[ok])
    return out


def _c_of_d(absd, src, dst):
    if src.size < 2:
        return None, "too_few_pairs"
    try:
        return pearson(absd[src], absd[dst]), None
    except ZeroVariance:
        return None, "zero_variance"


def distance_cross_correlation(network: ActivityNetwork, profile: PerturbationProfile,
                               d_max: int = DEFAULT_DMAX, pairs=None) -> DistanceCorrelation:
    """Pearson correlation of |delta| between the two ends of every pair of
    completed activities at shortest downstream distance exactly d.

    Moments are taken over each distance's pair list (population convention).
    ``pairs`` may hold a precomputed :func:`distance_pairs` result.
    """
    if pairs is None:
        pairs = distance_pairs(network, d_max)
    usable = _usable(pairs, profile.completed)
    absd = profile.abs_delta
    rows = []
    for d in range(1, d_max + 1):
        src, dst = usable[d]
        c, reason = _c_of_d(absd, src, dst)
        rows.append(DistanceCorrelationRow(d, c, int(src.size), reason))
    return DistanceCorrelation(tuple(rows))


# -- fragility ----------------------------------------------------------------

@dataclass(frozen=True)
class FragilityCorrelations:
    reach: CorrelationResult
    degree: CorrelationResult


def fragility_correlations(network: ActivityNetwork, profile: PerturbationProfile,
                           metrics: NodeMetrics | None = None) -> FragilityCorrelations:
    """Spearman of |delta| against reach and total degree over completed
    activities with at least one neighbour."""
    if metrics is None or metrics.reach is None:
        metrics = compute_node_metrics(network)
    use = profile.completed & (metrics.total_degree > 0)
    absd = profile.abs_delta[use]
    return FragilityCorrelations(
        reach=spearman(absd, metrics.reach[use]),
        degree=spearman(absd, metrics.total_degree[use]),
    )


# -- shuffling ---------------------------------------------------------------

def shuffle_perturbations(profile: PerturbationProfile, seed) -> PerturbationProfile:
    """Permute deviations uniformly across completed activities.

    The permutation moves signed values, so |delta| is permuted identically
    and its multiset is preserved; incomplete activities are untouched.
    ``seed`` is an int or a :class:`numpy.random.Generator`.
    """
    done = np.flatnonzero(profile.completed)
    if done.size < 2:
        raise InsufficientData("need at least 2 completed activities to shuffle")
    rng = seed if isinstance(seed, np.random.Generator) else sample_rng(seed)
    delta = profile.delta.copy()
    delta[done] = delta[done][rng.permutation(done.size)]
    return replace(profile, delta=delta)


@dataclass(frozen=True)
class NullEnsemble:
    statistic: str
    labels: tuple
    values: np.ndarray  # (samples, len(labels)); NaN where undefined
    failures: int
    seed: int

    @property
    def sample_count(self) -> int:
        return int(self.values.shape[0])

    @property
    def mean(self) -> np.ndarray:
        return np.array([_nanstat(c, np.mean) for c in self.values.T])

    @property
    def sd(self) -> np.ndarray:
        return np.array([_nanstat(c, lambda v: np.std(v, ddof=1) if v.size > 1 else np.nan)
                         for c in self.values.T])

    def band(self, label=None, width: float = 2.0) -> tuple[float, float]:
        k = 0 if label is None else self.labels.index(label)
        m, s = self.mean[k], self.sd[k]
        return float(m - width * s), float(m + width * s)


def _nanstat(col, fn):
    v = col[~np.isnan(col)]
    return float(fn(v)) if v.size else math.nan


def null_ensemble(network: ActivityNetwork, profile: PerturbationProfile,
                  statistic: str = "cross_correlation", samples: int = DEFAULT_SAMPLES,
                  seed: int = 0, *, d_max: int = DEFAULT_DMAX, pairs=None,
                  metrics: NodeMetrics | None = None) -> NullEnsemble:
    """Recompute ``statistic`` on ``samples`` shuffled copies of ``profile``.

    Statistics: ``cross_correlation`` (one value per distance 1..d_max),
    ``cascade_exponent`` (perturbed set = activities given a perturbing
    shuffled value) and ``fragility`` (reach and degree rho). A sample whose
    statistic cannot be computed counts as a failure; only an ensemble where
    every sample fails raises.
    """
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}; choose from {STATISTICS}")
    if samples < 2:
        raise ValueError("need at least 2 samples")

    if statistic == "cross_correlation":
        if pairs is None:
            pairs = distance_pairs(network, d_max)
        usable = _usable(pairs, profile.completed)
        labels = tuple(f"d={d}" for d in range(1, d_max + 1))

        def compute(p):
            absd = p.abs_delta
            return [np.nan if (c := _c_of_d(absd, *usable[d])[0]) is None else c
                    for d in range(1, d_max + 1)]
    elif statistic == "cascade_exponent":
        labels = ("exponent",)

        def compute(p):
            return [fit_scale_free(cascade_sizes(network, p.perturbed)).exponent]
    else:
        if metrics is None or metrics.reach is None:
            metrics = compute_node_metrics(network)
        labels = ("reach", "degree")

        def compute(p):
            f = fragility_correlations(network, p, metrics)
            return [f.reach.rho, f.degree.rho]

    values = np.full((samples, len(labels)), np.nan)
    failures = 0
    for k in range(samples):
        shuffled = shuffle_perturbations(profile, sample_rng(seed, k))
        try:
            values[k] = compute(shuffled)
        except CascadeKitError:
            failures += 1
            continue
        if np.all(np.isnan(values[k])):
            failures += 1
    if failures == samples:
        raise ComputationError(f"null_ensemble: every {statistic} sample failed")
    return NullEnsemble(statistic, labels, values, failures, seed)
