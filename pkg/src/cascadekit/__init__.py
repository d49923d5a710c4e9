"""Perturbation cascade analytics for project activity networks."""

__version__ = "0.1.0"

from .cascade import (Cascade, PowerLawFit, cascade_size_ccdf, ccdf, extract_cascades,
                      fit_ccdf, fit_scale_free)
from .graph import (DistancePairSet, NodeMetrics, compute_degrees, compute_diameter,
                    compute_node_metrics, compute_reach, distance_pairs, pairs_at_distance)
from .ingest import NetworkSummary, parse_project, read_project, summarize, write_project
from .network import Activity, ActivityNetwork, Dependency
from .null import (distance_cross_correlation, fragility_correlations, null_ensemble,
                   shuffle_perturbations)
from .perturbation import (PerturbationProfile, compute_perturbations, inheritance_tests,
                           parent_perturbation_fraction)
from .stats import mann_whitney_u, ols_regression, spearman
from .synth import GeneratorConfig, generate_dag, generate_project, seed_perturbations
