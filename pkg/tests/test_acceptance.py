"""Acceptance gate: one test per criterion, each printing a pass/fail line in
the terminal summary and enforcing its time limit."""

import time

import numpy as np
import pytest

from cascadekit.cascade import extract_cascades, fit_scale_free, cascade_sizes
from cascadekit.cli import main
from cascadekit.graph import compute_reach
from cascadekit.null import distance_cross_correlation, fragility_correlations, null_ensemble
from cascadekit.stats import mann_whitney_u, ols_regression, spearman
from cascadekit.synth import (GeneratorConfig, generate_dag, generate_project,
                              matched_inheritance_config, seed_perturbations, write_generated)

from conftest import make_network, make_profile, random_network
from oracles import (closure_reach, normal_equations, pairwise_u, population_pearson,
                     spearman_no_ties, union_find_components)
from test_ingest import PROJECT_SIZES

NODES = 5000
SAMPLES = 50


def finish(criterion, number, ok, elapsed, limit, detail):
    passed = bool(ok) and elapsed < limit
    criterion(number, passed, f"{detail} [{elapsed:.1f}s / limit {limit:.0f}s]")
    assert ok, detail
    assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"


def inheritance_scenario(seed):
    cfg = GeneratorConfig(node_count=NODES, seed=seed)
    dag = generate_dag(cfg)
    return dag, seed_perturbations(dag, matched_inheritance_config(dag, cfg, cfg.base_rate))


def test_criterion_01_table_one(criterion):
    t0 = time.perf_counter()
    bad = [(n, l, a) for n, l, a in PROJECT_SIZES if abs(2 * l / n - a) >= 0.01]
    finish(criterion, 1, len(PROJECT_SIZES) == 14 and not bad, time.perf_counter() - t0, 1,
           f"2L/N matches printed average degree for {14 - len(bad)}/14 rows")


def test_criterion_02_reach_oracle(criterion):
    t0 = time.perf_counter()
    ok = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 201))
        net, edges = random_network(rng, n, float(rng.uniform(0.005, 0.06)))
        ok += np.array_equal(compute_reach(net), closure_reach(n, edges))
    finish(criterion, 2, ok == 100, time.perf_counter() - t0, 10,
           f"reach equals transitive closure on {ok}/100 DAGs")


def test_criterion_03_cascade_oracle(criterion):
    t0 = time.perf_counter()
    ok = 0
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(2, 301))
        net, _ = random_network(rng, n, float(rng.uniform(0.002, 0.03)))
        mask = rng.random(n) < rng.uniform(0.05, 0.95)
        prof = make_profile(net, {i: (1.0 if m else 0.0) for i, m in zip(net.ids, mask)})
        hit = [i for i, m in zip(net.ids, mask) if m]
        hs = set(hit)
        induced = [(e.predecessor, e.successor) for e in net.edges
                   if e.predecessor in hs and e.successor in hs]
        ok += {c.members for c in extract_cascades(net, prof)} == union_find_components(hit, induced)
    finish(criterion, 3, ok == 100, time.perf_counter() - t0, 10,
           f"cascades equal union-find components on {ok}/100 DAGs")


def test_criterion_04_statistics_oracles(criterion):
    t0 = time.perf_counter()
    checks = {}
    x, y = [1, 2, 3], [3, 1, 2]
    checks["spearman"] = abs(spearman(x, y).rho - spearman_no_ties(x, y)) < 1e-9 and \
        abs(spearman([1, 2, 3], [10, 20, 30]).rho - 1) < 1e-9
    a, b = [0.1, 0.5, 0.5, 0.9, 0.3], [0.5, 0.2, 0.7, 0.7]
    checks["mann_whitney_u"] = mann_whitney_u(a, b).u == pairwise_u(a, b) and \
        mann_whitney_u([1, 2], [3, 4]).u == 0
    yy = [3.1, 4.9, 7.2, 8.8, 11.3, 12.7, 15.4]
    x1, x2 = [1, 2, 3, 4, 5, 6, 7], [2, 1, 4, 3, 6, 5, 8]
    fit = ols_regression(yy, {"x1": x1, "x2": x2})
    beta = normal_equations(yy, [x1, x2])
    checks["ols_regression"] = all(abs(fit[k].estimate - v) < 1e-9
                                   for k, v in zip(("intercept", "x1", "x2"), beta))
    ids = list("abcd")
    chain = make_network(ids, list(zip(ids, ids[1:])))
    c1 = distance_cross_correlation(chain, make_profile(chain, dict(zip(ids, [1, 3, 2, 2]))), 1)[1]
    c2 = distance_cross_correlation(chain, make_profile(chain, dict(zip(ids, [1, 2, 3, 4]))), 1)[1]
    checks["c_of_d"] = abs(c1.c_value - population_pearson([1, 3, 2], [3, 2, 2])) < 1e-9 and \
        abs(c2.c_value - 1) < 1e-9
    failed = [k for k, v in checks.items() if not v]
    finish(criterion, 4, not failed, time.perf_counter() - t0, 1,
           f"statistics match oracles ({len(checks) - len(failed)}/{len(checks)})")


@pytest.mark.slow
def test_criterion_05_null_regime(criterion):
    t0 = time.perf_counter()
    means = []
    for seed in range(20):
        net, prof = generate_project(GeneratorConfig(node_count=NODES, seed=seed))
        means.append(null_ensemble(net, prof, "cascade_exponent", SAMPLES, seed).mean[0])
    inside = sum(1 <= m <= 3 for m in means)
    finish(criterion, 5, inside >= 18, time.perf_counter() - t0, 120,
           f"null exponent mean in [1, 3] for {inside}/20 seeds "
           f"(range {min(means):.2f}-{max(means):.2f})")


@pytest.mark.slow
def test_criterion_06_clustered_separation(criterion):
    t0 = time.perf_counter()
    below = 0
    for seed in range(50):
        net, prof = inheritance_scenario(seed)
        observed = fit_scale_free(cascade_sizes(net, prof.perturbed)).exponent
        below += observed < null_ensemble(net, prof, "cascade_exponent", SAMPLES, seed).mean[0]
    finish(criterion, 6, below >= 45, time.perf_counter() - t0, 180,
           f"inheritance exponent below null mean in {below}/50 seeds")


@pytest.mark.slow
def test_criterion_07_c_of_d_decay(criterion):
    t0 = time.perf_counter()
    above, curves = 0, []
    for seed in range(50):
        net, prof = inheritance_scenario(seed)
        obs = distance_cross_correlation(net, prof, 4).values()
        ens = null_ensemble(net, prof, "cross_correlation", SAMPLES, seed, d_max=4)
        above += obs[0] > ens.mean[0] + 2 * ens.sd[0]
        curves.append(obs)
    mean_curve = np.nanmean(curves, axis=0)
    monotone = bool(np.all(np.diff(mean_curve) <= 0))
    finish(criterion, 7, above >= 45 and monotone, time.perf_counter() - t0, 180,
           f"C(1) above null+2sd in {above}/50 seeds; mean C(1..4) = "
           + ", ".join(f"{v:.3f}" for v in mean_curve))


@pytest.mark.slow
def test_criterion_08_fragility(criterion):
    t0 = time.perf_counter()
    detected = inside = 0
    for seed in range(50):
        base = dict(node_count=NODES, base_rate=0.4, seed=seed)
        dag = generate_dag(GeneratorConfig(**base))
        tgt = seed_perturbations(dag, GeneratorConfig(perturbation_model="reach_targeted", **base))
        r = fragility_correlations(dag, tgt).reach
        detected += r.rho > 0 and r.p_value < 0.05
        uni = seed_perturbations(dag, GeneratorConfig(**base))
        rho = fragility_correlations(dag, uni).reach.rho
        lo, hi = null_ensemble(dag, uni, "fragility", SAMPLES, seed).band("reach")
        inside += lo <= rho <= hi
    finish(criterion, 8, detected >= 45 and inside >= 45, time.perf_counter() - t0, 120,
           f"reach-targeted rho>0 with p<0.05 in {detected}/50; uniform rho inside null band in {inside}/50")


def test_criterion_09_performance(criterion, tmp_path):
    net, _ = generate_project(GeneratorConfig.for_size(29080, 50101, seed=7))
    assert (net.node_count, net.edge_count) == (29080, 50101)
    write_generated(tmp_path / "proj", net, GeneratorConfig.for_size(29080, 50101, seed=7))
    t0 = time.perf_counter()
    compute_reach(net)
    reach_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    code = main(["report", "--activities", str(tmp_path / "proj" / "activities.csv"),
                 "--dependencies", str(tmp_path / "proj" / "dependencies.csv"),
                 "--samples", "0", "--out-dir", str(tmp_path / "out")])
    report_s = time.perf_counter() - t0
    ok = code == 0 and reach_s < 10
    finish(criterion, 9, ok, report_s, 60,
           f"report on 29,080 nodes / 50,101 links in {report_s:.1f}s, compute_reach {reach_s:.2f}s")


def test_criterion_10_determinism(criterion, tmp_path):
    t0 = time.perf_counter()
    cfg = GeneratorConfig(node_count=1500, perturbation_model="inheritance", seed=3)
    net, _ = generate_project(cfg)
    write_generated(tmp_path / "proj", net, cfg)
    outs = []
    for k in (1, 2):
        out = tmp_path / f"run{k}"
        assert main(["report", "--activities", str(tmp_path / "proj" / "activities.csv"),
                     "--dependencies", str(tmp_path / "proj" / "dependencies.csv"),
                     "--samples", "20", "--seed", "11", "--out-dir", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    same = outs[0] == outs[1]
    finish(criterion, 10, same, time.perf_counter() - t0, 120,
           f"two report runs byte-identical across {len(outs[0])} artifacts")
