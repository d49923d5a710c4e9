"""Per-activity perturbations, delay rate and parent-inheritance statistics."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .exceptions import InsufficientData, InsufficientGroupSize, NoCompletedActivities
from .network import Activity, ActivityNetwork
from .stats import CorrelationResult, mann_whitney_u, spearman

VERY_LATE_DAYS = 30.0
PERTURBED_DEFS = ("nonzero", "positive")


class PerturbationClass(str, Enum):
    EARLY = "early"
    ON_TIME = "on_time"
    LATE = "late"
    VERY_LATE = "very_late"


def classify(delta: float) -> PerturbationClass:
    if delta < 0:
        return PerturbationClass.EARLY
    if delta == 0:
        return PerturbationClass.ON_TIME
    if delta <= VERY_LATE_DAYS:
        return PerturbationClass.LATE
    return PerturbationClass.VERY_LATE


@dataclass(frozen=True)
class PerturbationProfile:
    """Signed deviations (actual minus planned, days) aligned with ``ids``.

    ``delta`` is NaN for incomplete activities, which are excluded from every
    statistic. ``perturbed_def`` selects whether any deviation (``nonzero``)
    or only delays (``positive``) count as a perturbation.
    """

    ids: tuple
    completed: np.ndarray
    delta: np.ndarray
    perturbed_def: str = "nonzero"

    def __post_init__(self):
        if self.perturbed_def not in PERTURBED_DEFS:
            raise ValueError(f"perturbed_def must be one of {PERTURBED_DEFS}")
        if not (len(self.ids) == self.completed.size == self.delta.size):
            raise ValueError("ids, completed and delta must align")

    @property
    def abs_delta(self) -> np.ndarray:
        return np.abs(self.delta)

    @property
    def completed_count(self) -> int:
        return int(self.completed.sum())

    @property
    def perturbed(self) -> np.ndarray:
        d = np.where(self.completed, self.delta, 0.0)
        return (d > 0) if self.perturbed_def == "positive" else (d != 0)

    @property
    def perturbed_count(self) -> int:
        return int(self.perturbed.sum())

    @property
    def delay_rate(self) -> float:
        late = np.where(self.completed, self.delta, 0.0) > 0
        return float(late.sum()) / self.completed_count

    def classes(self) -> list:
        return [classify(d) if c else None for d, c in zip(self.delta.tolist(), self.completed)]

    def class_counts(self) -> dict:
        counts = {c: 0 for c in PerturbationClass}
        for c in self.classes():
            if c is not None:
                counts[c] += 1
        return counts

    def with_definition(self, perturbed_def: str) -> "PerturbationProfile":
        return replace(self, perturbed_def=perturbed_def)


def compute_perturbations(network: ActivityNetwork, perturbed_def: str = "nonzero") -> PerturbationProfile:
    completed = network.completed_mask()
    if not completed.any():
        raise NoCompletedActivities("no activity has an actual duration")
    delta = network.actual() - network.planned()
    return PerturbationProfile(network.ids, completed, delta, perturbed_def)


def apply_profile(network: ActivityNetwork, profile: PerturbationProfile) -> ActivityNetwork:
    """A copy of ``network`` whose actual durations realize ``profile``."""
    acts = network.activities
    new = []
    for node_id, done, d in zip(network.ids, profile.completed, profile.delta.tolist()):
        a = acts[node_id]
        actual = a.planned_duration + d if done else None
        new.append(Activity(a.id, a.planned_duration, actual, a.name))
    out = ActivityNetwork(new, [(e.predecessor, e.successor) for e in network.edges])
    return out


@dataclass(frozen=True)
class ParentPerturbationStats:
    """``p_pert`` per node (NaN where no parent is completed)."""

    ids: tuple
    p_pert: np.ndarray
    completed_parents: np.ndarray

    @property
    def eligible(self) -> np.ndarray:
        return self.completed_parents > 0


def parent_perturbation_fraction(network: ActivityNetwork,
                                 profile: PerturbationProfile) -> ParentPerturbationStats:
    """Fraction of each activity's completed direct predecessors that are perturbed.

    Incomplete parents are left out of the denominator.
    """
    n = network.node_count
    src, dst = network.src, network.dst
    parent_done = profile.completed[src]
    parent_pert = profile.perturbed[src] & parent_done
    total = np.bincount(dst, weights=parent_done.astype(float), minlength=n)
    hit = np.bincount(dst, weights=parent_pert.astype(float), minlength=n)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(total > 0, hit / np.where(total > 0, total, 1.0), np.nan)
    return ParentPerturbationStats(network.ids, p, total.astype(np.int64))


@dataclass(frozen=True)
class GroupComparison:
    u: float
    p_value: float
    median_perturbed: float
    median_unperturbed: float
    n_perturbed: int
    n_unperturbed: int


@dataclass(frozen=True)
class InheritanceTests:
    group: GroupComparison
    correlation: CorrelationResult


def inheritance_tests(stats: ParentPerturbationStats, profile: PerturbationProfile) -> InheritanceTests:
    """Rank-sum comparison of p_pert between perturbed and unperturbed
    activities, and Spearman correlation of p_pert with |delta|.

    Only completed activities with at least one completed parent enter.
    """
    use = stats.eligible & profile.completed
    p = stats.p_pert[use]
    pert = profile.perturbed[use]
    a, b = p[pert], p[~pert]
    if a.size < 2:
        raise InsufficientGroupSize("perturbed", int(a.size), 2)
    if b.size < 2:
        raise InsufficientGroupSize("unperturbed", int(b.size), 2)
    if p.size < 3:
        raise InsufficientGroupSize("eligible", int(p.size), 3)
    mw = mann_whitney_u(a, b)
    group = GroupComparison(mw.u, mw.p_value, float(np.median(a)), float(np.median(b)),
                            int(a.size), int(b.size))
    try:
        corr = spearman(p, profile.abs_delta[use])
    except InsufficientData as exc:
        raise InsufficientGroupSize("eligible", int(p.size), 3) from exc
    return InheritanceTests(group, corr)
