import numpy as np
import pytest

from cascadekit.network import Activity, ActivityNetwork
from cascadekit.perturbation import PerturbationProfile

from oracles import random_dag_edges


def make_network(ids, edges, planned=None, actual=None):
    planned = planned or {}
    actual = actual or {}
    acts = [Activity(i, planned.get(i, 10.0), actual.get(i)) for i in ids]
    return ActivityNetwork(acts, edges)


def make_profile(network, deltas, perturbed_def="nonzero"):
    """Profile from a {id: delta} map; ids missing from the map are incomplete."""
    delta = np.array([deltas.get(i, np.nan) for i in network.ids], dtype=float)
    done = np.array([i in deltas for i in network.ids])
    return PerturbationProfile(network.ids, done, delta, perturbed_def)


def random_network(rng, n, p):
    edges = random_dag_edges(rng, n, p)
    ids = [f"n{i:03d}" for i in range(n)]
    net = make_network(ids, [(ids[u], ids[v]) for u, v in edges])
    return net, edges


@pytest.fixture
def chain():
    return make_network(["a", "b", "c"], [("a", "b"), ("b", "c")])


@pytest.fixture
def diamond():
    return make_network(["a", "b", "c", "d"], [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])


@pytest.fixture
def two_cycle_files(tmp_path):
    act = tmp_path / "activities.csv"
    dep = tmp_path / "dependencies.csv"
    act.write_text("id,planned_duration,actual_duration\na,1,1\nb,2,3\n")
    dep.write_text("predecessor_id,successor_id\na,b\nb,a\n")
    return act, dep


# -- acceptance reporting ----------------------------------------------------

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    def record(number, passed, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {detail}")
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
