"""scikit-learn style wrappers so the analyses compose with pipelines and
``get_params``/``set_params`` tooling.

``ScaleFreeExponent`` is a regular estimator over 1-D positive values.
``NodeMetricsTransformer`` maps an :class:`ActivityNetwork` to a feature
matrix. ``ProjectAnalyzer`` runs the full per-project pipeline and keeps
every result as a fitted attribute.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .cascade import cascade_size_ccdf, ccdf, extract_cascades, fit_ccdf, fit_scale_free
from .exceptions import CascadeKitError
from .graph import DEFAULT_DMAX, compute_diameter, compute_node_metrics, distance_pairs
from .ingest import NetworkSummary
from .network import ActivityNetwork
from .null import (DEFAULT_SAMPLES, distance_cross_correlation, fragility_correlations,
                   null_ensemble)
from .perturbation import (PerturbationProfile, compute_perturbations, inheritance_tests,
                           parent_perturbation_fraction)
from .stats import ols_regression, spearman


@dataclass(frozen=True)
class Undefined:
    """Marker for a statistic that could not be computed."""

    reason: str

    def __str__(self):
        return f"undefined:{self.reason}"


def reason_code(exc: Exception) -> str:
    name = type(exc).__name__
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).lower()


def attempt(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except CascadeKitError as exc:
        return Undefined(reason_code(exc))


class ScaleFreeExponent(BaseEstimator):
    """Log-log CCDF regression for values >= ``min_value``.

    Values below ``min_value`` are dropped before fitting (degree
    distributions use ``min_value=1`` to skip isolated nodes).
    """

    def __init__(self, min_value: float = 1.0):
        self.min_value = min_value

    def _values(self, X):
        X = check_array(np.asarray(X, dtype=float).reshape(-1, 1), ensure_2d=True)
        v = X.ravel()
        return v[v >= self.min_value]

    def fit(self, X, y=None):
        v = self._values(X)
        fit = fit_scale_free(v)
        self.exponent_ = fit.exponent
        self.intercept_ = fit.intercept
        self.r_squared_ = fit.r_squared
        self.n_points_ = fit.points_used
        self.ccdf_ = ccdf(v)
        return self

    def predict(self, X):
        """Fitted P(X >= x) for each x."""
        check_is_fitted(self, "exponent_")
        x = np.asarray(X, dtype=float).ravel()
        return 10.0 ** (self.intercept_ - self.exponent_ * np.log10(x))

    def score(self, X, y=None):
        """R^2 of the fitted line against the empirical CCDF of ``X`` in log space."""
        check_is_fitted(self, "exponent_")
        pts = np.asarray(ccdf(self._values(X)))
        obs = np.log10(pts[:, 1])
        pred = np.log10(self.predict(pts[:, 0]))
        tot = np.sum((obs - obs.mean()) ** 2)
        return 1.0 - float(np.sum((obs - pred) ** 2) / tot) if tot > 0 else 1.0


class NodeMetricsTransformer(TransformerMixin, BaseEstimator):
    """Stateless: network -> array of (in_degree, out_degree, total_degree, reach)."""

    feature_names = ("in_degree", "out_degree", "total_degree", "reach")

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        if not isinstance(X, ActivityNetwork):
            raise TypeError("expected an ActivityNetwork")
        m = compute_node_metrics(X)
        return np.column_stack([m.in_degree, m.out_degree, m.total_degree, m.reach])

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.feature_names, dtype=object)


class ProjectAnalyzer(BaseEstimator):
    """Full per-project pipeline.

    ``fit(network)`` computes the summary table, node metrics, perturbation
    profile, parent-inheritance tests, cascades with their CCDF fit, the
    degree CCDF fit, C(d) for d = 1..d_max and the reach/degree fragility
    correlations. With ``samples >= 2`` shuffle null ensembles are added for
    C(d), the cascade exponent and the fragility correlations; ``samples=0``
    skips them. Statistics that cannot be computed are stored as
    :class:`Undefined`.
    """

    def __init__(self, perturbed_def: str = "nonzero", d_max: int = DEFAULT_DMAX,
                 samples: int = DEFAULT_SAMPLES, seed: int = 0):
        self.perturbed_def = perturbed_def
        self.d_max = d_max
        self.samples = samples
        self.seed = seed

    def fit(self, X: ActivityNetwork, y=None, profile: PerturbationProfile | None = None):
        if not isinstance(X, ActivityNetwork):
            raise TypeError("expected an ActivityNetwork")
        if self.samples < 0 or self.samples == 1:
            raise ValueError("samples must be 0 (skip null models) or >= 2")
        net = X
        self.network_ = net
        self.warnings_ = list(getattr(getattr(net, "ingest_log", None), "warnings", []))
        if profile is None:
            profile = compute_perturbations(net, self.perturbed_def)
        else:
            profile = profile.with_definition(self.perturbed_def)
        self.profile_ = profile
        self.metrics_ = compute_node_metrics(net)
        m = self.metrics_
        self.summary_ = NetworkSummary(
            node_count=net.node_count,
            link_count=net.edge_count,
            average_degree=2.0 * net.edge_count / net.node_count,
            max_degree=int(m.total_degree.max()),
            average_reach=float(m.reach.mean()),
            max_reach=int(m.reach.max()),
            delay_rate=profile.delay_rate,
            diameter=compute_diameter(net),
        )
        self.parent_stats_ = parent_perturbation_fraction(net, profile)
        self.inheritance_ = attempt(inheritance_tests, self.parent_stats_, profile)

        self.cascades_ = extract_cascades(net, profile)
        self.ccdf_ = attempt(cascade_size_ccdf, self.cascades_)
        self.cascade_fit_ = (self.ccdf_ if isinstance(self.ccdf_, Undefined)
                             else attempt(fit_ccdf, self.ccdf_))
        deg = m.total_degree[m.total_degree > 0]
        self.degree_fit_ = attempt(fit_scale_free, deg)

        pairs = distance_pairs(net, self.d_max)
        self.c_of_d_ = distance_cross_correlation(net, profile, self.d_max, pairs)
        self.fragility_ = attempt(fragility_correlations, net, profile, m)

        self.nulls_ = {}
        if self.samples >= 2:
            for stat in ("cross_correlation", "cascade_exponent", "fragility"):
                self.nulls_[stat] = attempt(
                    null_ensemble, net, profile, stat, self.samples, self.seed,
                    d_max=self.d_max, pairs=pairs, metrics=m)
            cross = self.nulls_["cross_correlation"]
            if not isinstance(cross, Undefined):
                self.c_of_d_ = self.c_of_d_.with_null(cross)
        return self

    @property
    def cascade_exponent_(self):
        check_is_fitted(self, "cascade_fit_")
        f = self.cascade_fit_
        return f if isinstance(f, Undefined) else f.exponent


def cross_project_table(analyzers: dict) -> dict:
    """Cross-project outputs for a manifest run.

    Returns per-project rows plus rank correlations of delay rate with the
    cascade exponent and with the reach/degree fragility rho, and linear
    regressions of delay rate on each with size controls.
    """
    rows = []
    for name, a in analyzers.items():
        frag = a.fragility_
        rows.append({
            "project": name,
            "node_count": a.summary_.node_count,
            "perturbed_count": a.profile_.perturbed_count,
            "delay_rate": a.summary_.delay_rate,
            "cascade_exponent": a.cascade_exponent_,
            "rho_reach": frag if isinstance(frag, Undefined) else frag.reach.rho,
            "rho_degree": frag if isinstance(frag, Undefined) else frag.degree.rho,
        })

    def column(key, subset):
        return [r[key] for r in subset]

    def usable(*keys):
        return [r for r in rows if not any(isinstance(r[k], Undefined) for k in keys)]

    tests = {}
    for key in ("cascade_exponent", "rho_reach", "rho_degree"):
        sub = usable(key)
        tests[f"spearman_delay_rate_vs_{key}"] = attempt(
            spearman, column(key, sub), column("delay_rate", sub))
    sub = usable("cascade_exponent")
    tests["ols_delay_rate_on_exponent_and_perturbed"] = attempt(
        ols_regression, column("delay_rate", sub),
        {"cascade_exponent": column("cascade_exponent", sub),
         "perturbed_count": column("perturbed_count", sub)})
    sub = usable("rho_reach")
    tests["ols_delay_rate_on_reach_rho_and_size"] = attempt(
        ols_regression, column("delay_rate", sub),
        {"rho_reach": column("rho_reach", sub),
         "node_count": column("node_count", sub),
         "perturbed_count": column("perturbed_count", sub)})
    return {"rows": rows, "tests": tests}

