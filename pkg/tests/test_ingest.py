import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cascadekit.exceptions import (CycleDetected, DanglingEdgeEndpoint, DuplicateActivityId,
                                   EmptyProject, MalformedRow)
from cascadekit.ingest import parse_project, read_project, summarize, write_project
from cascadekit.network import Activity, ActivityNetwork, Status
from cascadekit.perturbation import compute_perturbations

from conftest import make_network, random_network

# (nodes, links, printed average degree) for the 14 published projects
PROJECT_SIZES = [
    (10734, 15524, 2.89), (35618, 61199, 3.44), (17160, 25790, 3.01), (2458, 5525, 4.5),
    (975, 1367, 2.8), (544, 776, 2.85), (29080, 50101, 3.45), (641, 997, 3.11),
    (1287, 2117, 3.29), (17263, 19391, 2.25), (13625, 25034, 3.67), (3156, 3237, 2.05),
    (282, 292, 2.07), (15757, 22648, 2.87),
]


def text(s):
    return io.StringIO(s)


@pytest.mark.parametrize("nodes,links,avg", PROJECT_SIZES)
def test_project_sizes_average_degree_is_twice_links_over_nodes(nodes, links, avg):
    assert abs(2 * links / nodes - avg) < 0.01


@pytest.mark.parametrize("nodes,links,avg", [PROJECT_SIZES[0], PROJECT_SIZES[12]])
def test_summary_average_degree_on_project_sized_chain(nodes, links, avg):
    # a chain plus skip edges with the listed node and link counts
    ids = [f"x{i}" for i in range(nodes)]
    edges = [(ids[i], ids[i + 1]) for i in range(nodes - 1)]
    extra = links - len(edges)
    edges += [(ids[i], ids[i + 2]) for i in range(extra)]
    net = make_network(ids, edges, actual={i: 10.0 for i in ids})
    s = summarize(net, compute_perturbations(net))
    assert s.link_count == links
    assert round(s.average_degree, 2) == avg
    assert s.average_degree == pytest.approx(2 * links / nodes, abs=1e-9)


def test_chain_parses():
    net = parse_project(text("id,planned_duration,actual_duration\na,1,1\nb,2,2\nc,3,\n"),
                        text("predecessor_id,successor_id\na,b\nb,c\n"))
    assert net.node_count == 3 and net.edge_count == 2
    assert net.edge_pairs() == {("a", "b"), ("b", "c")}


def test_two_cycle_reports_cycle(two_cycle_files):
    act, dep = two_cycle_files
    with pytest.raises(CycleDetected) as info:
        parse_project(act, dep)
    assert info.value.cycle == ["a", "b"]
    assert "[a, b]" in str(info.value)


def test_allow_cycles_drops_one_edge(two_cycle_files):
    net = parse_project(*two_cycle_files, allow_cycles=True)
    assert net.edge_count == 1
    assert len(net.removed_edges) == 1
    assert any("feedback edge" in w for w in net.ingest_log.warnings)


def test_blank_actual_is_incomplete():
    net = parse_project(text("id,planned_duration,actual_duration\na,4,\nb,4,5\n"),
                        text("predecessor_id,successor_id\na,b\n"))
    assert net.activity("a").status is Status.INCOMPLETE
    assert net.activity("b").status is Status.COMPLETED
    assert np.isnan(net.actual()[0])


def test_dates_give_durations_and_duration_column_wins():
    acts = ("id,planned_start,planned_end,actual_start,actual_end,actual_duration\n"
            "a,2020-01-01,2020-01-11,2020-01-01,2020-01-14,\n"
            "b,2020-02-01,2020-02-03,2020-02-01,2020-02-09,5\n")
    net = parse_project(text(acts), text("predecessor_id,successor_id\na,b\n"))
    assert net.activity("a").planned_duration == 10
    assert net.activity("a").actual_duration == 13
    assert net.activity("b").actual_duration == 5


@pytest.mark.parametrize("sep", [",", "\t", ";"])
def test_delimiter_detection(sep):
    acts = sep.join(["id", "planned_duration", "actual_duration"]) + "\n" + sep.join(["a", "1", "2"]) + "\n"
    acts += sep.join(["b", "1", "1"]) + "\n"
    deps = sep.join(["predecessor_id", "successor_id"]) + "\n" + sep.join(["a", "b"]) + "\n"
    net = parse_project(text(acts), text(deps))
    assert net.edge_pairs() == {("a", "b")}


def test_duplicate_edges_and_link_types_are_warned():
    net = parse_project(
        text("id,planned_duration\na,1\nb,1\nc,1\n"),
        text("predecessor_id,successor_id,link_type\na,b,FS\na,b,FS\nb,c,SS\n"))
    log = net.ingest_log
    assert net.edge_count == 2
    assert log.warned == 2 and log.accepted == 4 and log.errored == 0
    assert log.balanced()


def test_lenient_mode_accounts_for_every_row():
    net = parse_project(
        text("id,planned_duration\na,1\nb,oops\nc,1\na,2\n"),
        text("predecessor_id,successor_id\na,c\na,zz\n"), strict=False)
    log = net.ingest_log
    assert log.rows_in == 6
    assert (log.accepted, log.warned, log.errored) == (3, 0, 3)
    assert log.balanced()


@pytest.mark.parametrize("acts,deps,exc", [
    ("id,planned_duration\na,1\na,2\n", "predecessor_id,successor_id\n", DuplicateActivityId),
    ("id,planned_duration\na,1\n", "predecessor_id,successor_id\na,b\n", DanglingEdgeEndpoint),
    ("id,planned_duration\na,-1\n", "predecessor_id,successor_id\n", MalformedRow),
    ("id,planned_duration\na,1\n", "predecessor_id,successor_id\na,a\n", MalformedRow),
    ("id,planned_duration\n", "predecessor_id,successor_id\n", EmptyProject),
    ("name,planned_duration\na,1\n", "predecessor_id,successor_id\n", MalformedRow),
])
def test_errors(acts, deps, exc):
    with pytest.raises(exc):
        parse_project(text(acts), text(deps))


def test_malformed_row_names_line():
    with pytest.raises(MalformedRow) as info:
        parse_project(text("id,planned_duration\na,1\nb,x\n"), text("predecessor_id,successor_id\n"))
    assert info.value.line == 3


def test_singleton_summary():
    net = ActivityNetwork([Activity("only", 3.0, 3.0)], [])
    s = summarize(net, compute_perturbations(net))
    assert (s.average_degree, s.max_reach, s.diameter) == (0.0, 0, 1)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 40), p=st.floats(0.0, 0.4))
def test_round_trip(tmp_path_factory, seed, n, p):
    rng = np.random.default_rng(seed)
    net, _ = random_network(rng, n, p)
    acts = [Activity(i, float(rng.integers(0, 20)),
                     None if rng.random() < 0.2 else float(rng.integers(0, 30)) + 0.5)
            for i in net.ids]
    net = ActivityNetwork(acts, net.edges)
    d = tmp_path_factory.mktemp("rt")
    write_project(net, d / "activities.csv", d / "dependencies.csv")
    back = read_project(d)
    assert back.ids == net.ids
    assert back.edge_pairs() == net.edge_pairs()
    assert back.activities == net.activities
    if any(a.completed for a in acts):
        assert summarize(back, compute_perturbations(back)) == summarize(net, compute_perturbations(net))
