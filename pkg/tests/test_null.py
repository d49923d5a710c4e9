import itertools
from collections import Counter

import numpy as np
import pytest
from scipy import stats as sps

from cascadekit.exceptions import ComputationError, InsufficientData
from cascadekit.graph import compute_reach
from cascadekit.null import (fragility_correlations, null_ensemble, sample_rng,
                             shuffle_perturbations)
from cascadekit.synth import GeneratorConfig, generate_project

from conftest import make_network, make_profile


@pytest.fixture(scope="module")
def uniform_project():
    return generate_project(GeneratorConfig(node_count=2000, seed=11))


def test_shuffle_preserves_multiset_and_skips_incomplete():
    net = make_network(list("abcde"), [])
    prof = make_profile(net, {"a": 0, "b": 0, "c": -3, "d": 7})
    out = shuffle_perturbations(prof, 5)
    assert sorted(out.abs_delta[:4]) == [0, 0, 3, 7]
    assert sorted(out.delta[:4]) == [-3, 0, 0, 7]
    assert np.isnan(out.delta[4]) and not out.completed[4]


def test_shuffle_deterministic():
    net = make_network([f"n{i}" for i in range(30)], [])
    prof = make_profile(net, {f"n{i}": i for i in range(30)})
    assert np.array_equal(shuffle_perturbations(prof, 3).delta, shuffle_perturbations(prof, 3).delta)
    assert not np.array_equal(shuffle_perturbations(prof, 3).delta, shuffle_perturbations(prof, 4).delta)


def test_shuffle_needs_two():
    net = make_network(["a", "b"], [])
    with pytest.raises(InsufficientData):
        shuffle_perturbations(make_profile(net, {"a": 1}), 0)


def test_shuffle_orderings_uniform():
    net = make_network(list("abc"), [])
    prof = make_profile(net, {"a": 1, "b": 2, "c": 3})
    counts = Counter(tuple(shuffle_perturbations(prof, sample_rng(0, k)).delta) for k in range(1000))
    orders = list(itertools.permutations((1.0, 2.0, 3.0)))
    assert set(counts) == set(orders)
    _, p = sps.chisquare([counts[o] for o in orders])
    assert p > 0.01


def test_cascade_exponent_null_in_one_to_three(uniform_project):
    net, prof = uniform_project
    ens = null_ensemble(net, prof, "cascade_exponent", samples=20, seed=1)
    assert ens.failures == 0
    assert np.all((ens.values >= 1) & (ens.values <= 3))


def test_cross_correlation_null_centred(uniform_project):
    net, prof = uniform_project
    ens = null_ensemble(net, prof, "cross_correlation", samples=50, seed=2, d_max=4)
    se = ens.sd / np.sqrt(ens.sample_count)
    assert np.all(np.abs(ens.mean) <= 2 * se)


def test_two_sample_rerun_identical(uniform_project):
    net, prof = uniform_project
    for stat in ("cross_correlation", "cascade_exponent", "fragility"):
        a = null_ensemble(net, prof, stat, samples=2, seed=9, d_max=3)
        b = null_ensemble(net, prof, stat, samples=2, seed=9, d_max=3)
        assert np.array_equal(a.values, b.values, equal_nan=True)


def test_partial_failures_are_counted():
    # sizes are [2, 1] only when a and b both draw a nonzero value; otherwise degenerate
    net = make_network(list("abcde"), [("a", "b")])
    prof = make_profile(net, {"a": 1, "b": 2, "c": 3, "d": 0, "e": 0})
    ens = null_ensemble(net, prof, "cascade_exponent", samples=40, seed=0)
    assert 0 < ens.failures < 40
    assert np.isnan(ens.values).sum() == ens.failures


def test_all_failures_raise():
    net = make_network(list("abcd"), [("a", "b"), ("b", "c")])
    prof = make_profile(net, dict.fromkeys("abcd", 2))
    with pytest.raises(ComputationError):
        null_ensemble(net, prof, "cross_correlation", samples=5, d_max=2)


def test_bad_arguments():
    net = make_network(list("ab"), [])
    prof = make_profile(net, {"a": 1, "b": 2})
    with pytest.raises(ValueError):
        null_ensemble(net, prof, "nope")
    with pytest.raises(ValueError):
        null_ensemble(net, prof, "fragility", samples=1)


def test_delta_proportional_to_reach(uniform_project):
    net, _ = uniform_project
    reach = compute_reach(net)
    prof = make_profile(net, {i: 3 * float(r) for i, r in zip(net.ids, reach)})
    assert fragility_correlations(net, prof).reach.rho == pytest.approx(1.0)


def test_shuffled_delta_inside_null(uniform_project):
    net, prof = uniform_project
    observed = fragility_correlations(net, shuffle_perturbations(prof, 12345)).reach.rho
    ens = null_ensemble(net, prof, "fragility", samples=50, seed=3)
    assert abs(observed) <= np.percentile(np.abs(ens.values[:, 0]), 95)


def test_reach_targeted_is_detected():
    net, prof = generate_project(GeneratorConfig(node_count=3000, perturbation_model="reach_targeted",
                                                 base_rate=0.4, seed=5))
    r = fragility_correlations(net, prof).reach
    assert r.rho > 0 and r.p_value < 0.05
