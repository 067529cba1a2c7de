from __future__ import annotations

import random

import networkx as nx
import pytest
from hypothesis import given, settings

from lcalab.engine import (COLORING, IN, MATCHED, MATCHING, MIS, OUT, UNMATCHED, get_algorithm,
                           global_online_run, greedy_coloring_decide, greedy_matching_decide,
                           greedy_mis_decide, lca_answer, lca_answer_method1, method2_discover,
                           structure_for, verify_assignment)
from lcalab.errors import ParameterError
from lcalab.graph import (GeneratorSpec, Graph, GraphOracle, LineGraph, complete_graph, generate,
                          line_graph, path_graph)
from lcalab.ordering import sample_ranking
from lcalab.vicinity import relevant_vicinity

from conftest import by_order, graph_and_ranking

PROBLEMS = (MIS, MATCHING, COLORING)


def answer(g, rf, alg, x, method=1):
    return lca_answer(GraphOracle(structure_for(g, alg)), rf, alg, x, method=method)


def edge_ranking(g, seed, L=None):
    return sample_ranking(g.m, L or min(4, g.m), g.m, seed)


# -- decide functions ------------------------------------------------------

def test_mis_decide():
    assert greedy_mis_decide(0, []) == IN
    assert greedy_mis_decide(0, [(1, IN)]) == OUT
    assert greedy_mis_decide(0, [(1, OUT), (2, OUT)]) == IN


def test_matching_decide():
    assert greedy_matching_decide(0, []) == MATCHED
    assert greedy_matching_decide(0, [(1, MATCHED)]) == UNMATCHED


def test_coloring_decide():
    assert greedy_coloring_decide(0, []) == 1
    assert greedy_coloring_decide(0, [(1, 1), (2, 2)]) == 3
    assert greedy_coloring_decide(0, [(1, 2)]) == 1


def test_unknown_problem():
    with pytest.raises(ParameterError):
        get_algorithm("tsp")


# -- hand-traced instances -------------------------------------------------

def test_isolated_vertex_is_in():
    assert answer(Graph.empty(1), by_order([0]), MIS, 0).output == IN


def test_triangle_mis():
    g, rf = complete_graph(3), by_order([0, 1, 2])
    assert [answer(g, rf, MIS, v).output for v in range(3)] == [IN, OUT, OUT]
    assert [answer(g, rf, MIS, v, method=2).output for v in range(3)] == [IN, OUT, OUT]


def test_three_edge_path_matching():
    g = path_graph(4)
    rf = by_order([0, 1, 2])
    assert [answer(g, rf, MATCHING, e).output for e in range(3)] == [MATCHED, UNMATCHED, MATCHED]


def test_global_run_examples():
    assert set(global_online_run(Graph.empty(4), by_order([3, 2, 1, 0]), MIS).values()) == {IN}
    rf = by_order([2, 0, 3, 1])
    out = global_online_run(complete_graph(4), rf, MIS)
    assert [v for v in range(4) if out[v] == IN] == [2]
    out = global_online_run(path_graph(4), by_order([0, 1, 2, 3]), COLORING)
    assert [out[v] for v in range(4)] == [1, 2, 1, 2]


def test_domain_mismatch_rejected():
    g = path_graph(3)
    with pytest.raises(ParameterError):
        lca_answer_method1(GraphOracle(g), by_order([0, 1, 2]), MATCHING, 0)
    with pytest.raises(ParameterError):
        lca_answer_method1(GraphOracle(g), by_order([0, 1]), MIS, 0)
    with pytest.raises(ParameterError):
        lca_answer(GraphOracle(g), by_order([0, 1, 2]), MIS, 0, method=3)
    with pytest.raises(ParameterError):
        global_online_run(g, by_order([0, 1, 2]), MATCHING)


# -- verify_assignment -----------------------------------------------------

def test_verify_examples():
    k3 = complete_graph(3)
    assert verify_assignment(k3, "mis", {0: IN, 1: OUT, 2: OUT}) == []
    assert ("adjacent-in", (0, 1)) in verify_assignment(k3, "mis", {0: IN, 1: IN, 2: OUT})
    p3 = path_graph(3)
    assert verify_assignment(p3, "mis", {0: OUT, 1: OUT, 2: OUT})
    assert verify_assignment(p3, "mis", {0: IN, 1: OUT}) == [("missing", 2)]


def test_verify_matching_and_coloring():
    p4 = path_graph(4)
    assert verify_assignment(p4, "matching", {0: MATCHED, 1: UNMATCHED, 2: MATCHED}) == []
    assert verify_assignment(p4, "matching", {0: MATCHED, 1: MATCHED, 2: UNMATCHED})
    assert ("not-maximal", 2) in verify_assignment(
        p4, "matching", {0: MATCHED, 1: UNMATCHED, 2: UNMATCHED})
    assert verify_assignment(p4, "coloring", {0: 1, 1: 2, 2: 1, 3: 2}) == []
    assert ("conflict", (1, 2)) in verify_assignment(p4, "coloring", {0: 1, 1: 2, 2: 2, 3: 1})
    assert ("out-of-range", 0) in verify_assignment(p4, "coloring", {0: 4, 1: 2, 2: 1, 3: 2})


# -- properties ------------------------------------------------------------

def _lexfirst_mis(g, rf):
    """Independent oracle: scan by rank, keep a vertex if no kept neighbor."""
    kept = set()
    for v in sorted(range(g.n), key=lambda x: (rf.level(x), x)):
        if not any(w in kept for w in g.adjacency[v]):
            kept.add(v)
    return kept


@given(graph_and_ranking())
@settings(max_examples=150)
def test_global_mis_matches_independent_oracle(case):
    g, rf = case
    out = global_online_run(g, rf, MIS)
    assert {v for v in range(g.n) if out[v] == IN} == _lexfirst_mis(g, rf)
    nxg = nx.Graph()
    nxg.add_nodes_from(range(g.n))
    nxg.add_edges_from(g.edges())
    chosen = {v for v in range(g.n) if out[v] == IN}
    assert nx.is_dominating_set(nxg, chosen)
    assert not any(g.has_edge(u, v) for u in chosen for v in chosen if u < v)


@given(graph_and_ranking())
@settings(max_examples=150)
def test_lca_equals_global_run_for_vertex_problems(case):
    g, rf = case
    for alg in (MIS, COLORING):
        ref = global_online_run(g, rf, alg)
        for v in range(g.n):
            r1 = answer(g, rf, alg, v)
            r2 = answer(g, rf, alg, v, method=2)
            assert r1.output == r2.output == ref[v]
            assert r1.queries == r1.t_v == r2.queries == r2.t_v
            assert r1.t_e == r2.t_e
        assert verify_assignment(g, alg.name, ref) == []


@given(graph_and_ranking(min_n=2, max_n=9))
@settings(max_examples=150)
def test_matching_via_implicit_line_graph(case):
    g, _ = case
    if g.m == 0:
        return
    rf = edge_ranking(g, g.m * 31 + g.n)
    ref = global_online_run(g, rf, MATCHING)
    # Same greedy run directly on the materialized line graph, as a vertex problem.
    explicit = global_online_run(line_graph(g), rf, MIS)
    assert all((ref[e] == MATCHED) == (explicit[e] == IN) for e in range(g.m))
    for e in range(g.m):
        assert answer(g, rf, MATCHING, e).output == ref[e]
        assert answer(g, rf, MATCHING, e, method=2).output == ref[e]
    matched = [g.edge_endpoints(e) for e in range(g.m) if ref[e] == MATCHED]
    nxg = nx.Graph(list(g.edges()))
    assert nx.is_maximal_matching(nxg, set(matched))


def test_matching_explicit_line_graph_medium():
    for seed in range(5):
        g = generate(GeneratorSpec("gnp", n=50, d=3, rng_seed=seed))
        rf = edge_ranking(g, seed, L=8)
        ref = global_online_run(g, rf, MATCHING)
        explicit = global_online_run(line_graph(g), rf, MIS)
        assert all((ref[e] == MATCHED) == (explicit[e] == IN) for e in range(g.m))


@given(graph_and_ranking())
@settings(max_examples=150)
def test_short_labels_descend_in_rank(case):
    g, rf = case
    rank = lambda x: (rf.level(x), x)
    for v in range(g.n):
        st = method2_discover(GraphOracle(g), rf, v)
        members = relevant_vicinity(GraphOracle(g), rf, v).members
        assert st.ids[0] == v
        assert st.ids == sorted(members, key=rank, reverse=True)
        # every stored position points at the labeled endpoint
        for label, entries in enumerate(st.d1, start=1):
            src = st.ids[label - 1]
            for other, pos, direction in entries:
                assert direction in (0, 1)
                assert g.adjacency[src][pos] == st.ids[other - 1]


def test_single_vertex_labels():
    st = method2_discover(GraphOracle(Graph.empty(1)), by_order([0]), 0)
    assert st.ids == [0] and st.t_v == 1 and st.t_e == 0


def test_triangle_labels():
    st = method2_discover(GraphOracle(complete_graph(3)), by_order([0, 1, 2]), 2)
    assert st.ids == [2, 1, 0]


def test_repeated_inquiries_identical():
    g = generate(GeneratorSpec("gnp", n=400, d=3, rng_seed=9))
    rf = sample_ranking(400, 16, 60, "0xBEEF")
    oracle = GraphOracle(g)
    for v in range(0, 400, 13):
        a = lca_answer(oracle, rf, MIS, v).to_json(timing=False)
        b = lca_answer(oracle, rf, MIS, v).to_json(timing=False)
        assert a == b and a["time_ns"] is None


def test_methods_agree_on_random_instances():
    rng = random.Random(3)
    for i in range(300):
        n = rng.randint(2, 200)
        g = generate(GeneratorSpec("gnp", n=n, d=min(3, n - 1), rng_seed=i))
        alg = PROBLEMS[i % 3]
        structure = structure_for(g, alg)
        if structure.n == 0:
            continue
        rf = sample_ranking(structure.n, rng.randint(1, min(16, structure.n)),
                            rng.randint(1, structure.n), i)
        x = rng.randrange(structure.n)
        o = GraphOracle(structure)
        assert lca_answer(o, rf, alg, x, method=1).output == lca_answer(o, rf, alg, x, method=2).output


def test_peak_words_positive_and_method2_not_larger_on_big_vicinities():
    g = generate(GeneratorSpec("gnp", n=2000, d=3, rng_seed=1))
    rf = sample_ranking(2000, 16, 100, 5)
    o = GraphOracle(g)
    for v in range(0, 2000, 50):
        r1 = lca_answer(o, rf, COLORING, v, method=1)
        r2 = lca_answer(o, rf, COLORING, v, method=2)
        assert r1.peak_words > 0 and r2.peak_words > 0
        assert r2.peak_words <= r1.peak_words


def test_line_graph_structure_for():
    g = path_graph(3)
    assert isinstance(structure_for(g, MATCHING), LineGraph)
    assert structure_for(g, MIS) is g
