from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings

from lcalab.errors import BudgetExceeded, ParameterError
from lcalab.graph import (GeneratorSpec, Graph, GraphOracle, complete_graph, generate, path_graph,
                          star_graph)
from lcalab.ordering import sample_ranking
from lcalab.vicinity import (budget_from_env, containing_chain, containing_vicinity, levelhood,
                             relevant_vicinity, vicinity_stats)

from conftest import Levels, by_order, graph_and_ranking


def fixed_point(g, rf, v):
    """Independent oracle: iterate the closure rule over the whole graph until stable."""
    rank = lambda x: (rf.level(x), x)
    members = {v}
    changed = True
    while changed:
        changed = False
        for u in list(members):
            for w in g.adjacency[u]:
                if rank(w) < rank(u) and w not in members:
                    members.add(w)
                    changed = True
    return members


def explore(g, rf, v, **kw):
    return relevant_vicinity(GraphOracle(g), rf, v, **kw)


def test_minimum_rank_vertex_alone():
    g = path_graph(3)
    vic = explore(g, by_order([1, 0, 2]), 1)
    assert vic.members == {1} and vic.t_v == 1 and vic.queries == 1 and vic.t_e == 2


def test_path_forced_closure():
    vic = explore(path_graph(3), by_order([0, 1, 2]), 2)
    assert vic.members == {0, 1, 2}


def test_triangle_edges():
    vic = explore(complete_graph(3), by_order([0, 1, 2]), 2)
    assert vic.members == {0, 1, 2} and vic.t_e == 3
    assert vic.adjacent_edges == {(0, 1), (0, 2), (1, 2)}


def test_isolated_vertex():
    vic = explore(Graph.empty(3), by_order([2, 1, 0]), 1)
    assert vic.members == {1} and vic.t_e == 0


def test_bad_inputs():
    with pytest.raises(ParameterError):
        explore(path_graph(3), by_order([0, 1, 2]), 3)
    with pytest.raises(ParameterError):
        explore(path_graph(3), by_order([0, 1, 2]), 0, order="random")


def test_budget():
    g = path_graph(50)
    rf = by_order(list(range(50)))
    with pytest.raises(BudgetExceeded) as exc:
        explore(g, rf, 49, budget=10)
    assert exc.value.center == 49
    assert explore(g, rf, 49, budget=50).t_v == 50


def test_budget_from_env(monkeypatch):
    monkeypatch.delenv("LCALAB_BUDGET", raising=False)
    assert budget_from_env() == 10**6
    monkeypatch.setenv("LCALAB_BUDGET", "17")
    assert budget_from_env() == 17
    for bad in ("abc", "0"):
        monkeypatch.setenv("LCALAB_BUDGET", bad)
        with pytest.raises(ParameterError):
            budget_from_env()


@given(graph_and_ranking())
@settings(max_examples=300)
def test_vicinity_is_the_least_fixed_point(case):
    g, rf = case
    rank = lambda x: (rf.level(x), x)
    for v in range(g.n):
        vic = explore(g, rf, v)
        assert set(vic.members) == fixed_point(g, rf, v)
        assert v in vic.members
        # closure
        for u in vic.members:
            for w in g.adjacency[u]:
                if rank(w) < rank(u):
                    assert w in vic.members
        # every incident edge is recorded once, canonically
        incident = {(min(u, w), max(u, w)) for u in vic.members for w in g.adjacency[u]}
        assert vic.adjacent_edges == incident and vic.t_e == len(incident)
        assert vic.t_e >= vic.t_v - 1
        assert vic.queries == vic.t_v


@given(graph_and_ranking())
@settings(max_examples=200)
def test_minimality_via_descending_paths(case):
    g, rf = case
    rank = lambda x: (rf.level(x), x)
    for v in range(g.n):
        members = explore(g, rf, v).members
        # Everything reachable from v by rank-decreasing steps, and nothing else.
        reach, stack = {v}, [v]
        while stack:
            u = stack.pop()
            for w in g.adjacency[u]:
                if rank(w) < rank(u) and w not in reach:
                    reach.add(w)
                    stack.append(w)
        assert members == reach


@given(graph_and_ranking())
@settings(max_examples=200)
def test_dfs_and_bfs_agree(case):
    g, rf = case
    for v in range(g.n):
        a = explore(g, rf, v, order="dfs")
        b = explore(g, rf, v, order="bfs")
        assert a.members == b.members and a.adjacent_edges == b.adjacent_edges


def test_dfs_bfs_agree_on_random_instances():
    rng = random.Random(1)
    for i in range(1000):
        n = rng.randint(2, 60)
        g = generate(GeneratorSpec("gnp", n=n, d=min(3, n - 1), rng_seed=i))
        rf = sample_ranking(n, rng.randint(1, min(16, n)), rng.randint(1, n), i)
        v = rng.randrange(n)
        a, b = explore(g, rf, v, order="dfs"), explore(g, rf, v, order="bfs")
        assert a.members == b.members and a.adjacent_edges == b.adjacent_edges


def test_reads_only_members_and_their_neighbors():
    g = generate(GeneratorSpec("gnp", n=500, d=3, rng_seed=2))
    rf = sample_ranking(500, 16, 50, 3)
    seen = []

    class Spy:
        n, L = rf.n, rf.L

        def level(self, v):
            seen.append(v)
            return rf.level(v)

    for v in range(0, 500, 7):
        seen.clear()
        oracle = GraphOracle(g, record=True)
        vic = relevant_vicinity(oracle, Spy(), v)
        assert set(oracle.fetched) == set(vic.members)
        allowed = set(vic.members) | {w for u in vic.members for w in g.adjacency[u]}
        assert set(seen) <= allowed


# -- levelhoods and the containing vicinity --------------------------------

def test_levelhood_floods_one_level():
    g = path_graph(5)
    rf = Levels([1, 2, 2, 1, 2])
    hood = levelhood(GraphOracle(g), rf, {1}, 2)
    assert hood.closure == {1, 2}
    assert hood.base <= hood.closure
    assert all(rf.level(u) == 2 for u in hood.closure - hood.base)


def test_star_at_one_level():
    g = star_graph(5)
    assert containing_vicinity(GraphOracle(g), Levels([1] * 6), 0) == set(range(6))


def test_single_vertex():
    assert containing_vicinity(GraphOracle(Graph.empty(1)), Levels([3], L=4), 0) == {0}


def test_ascending_composition_misses_lower_levels():
    # 1 sits below 0 in level, so it belongs to the relevant vicinity of 0.
    g = path_graph(2)
    rf = Levels([2, 1])
    oracle = GraphOracle(g)
    assert relevant_vicinity(oracle, rf, 0).members == {0, 1}
    current = frozenset([0])
    for ell in range(rf.level(0), rf.L + 1):
        current = levelhood(oracle, rf, current, ell).closure
    assert current == {0}
    assert containing_vicinity(oracle, rf, 0) == {0, 1}


@given(graph_and_ranking())
@settings(max_examples=200)
def test_levelhood_invariants(case):
    g, rf = case
    oracle = GraphOracle(g)
    for v in range(g.n):
        chain = containing_chain(oracle, rf, v)
        assert [h.level for h in chain] == list(range(rf.level(v), 0, -1))
        prev = frozenset([v])
        for hood in chain:
            assert hood.base == prev and prev <= hood.closure
            ell = hood.level
            assert all(rf.level(u) == ell for u in hood.closure - hood.base)
            for u in hood.closure:
                for w in g.adjacency[u]:
                    if rf.level(w) == ell:
                        assert w in hood.closure
            prev = hood.closure


def test_relevant_inside_containing_on_random_triples():
    rng = random.Random(7)
    for i in range(1000):
        n = rng.randint(1, 80)
        g = generate(GeneratorSpec("gnp", n=n, d=min(3, max(n - 1, 0)), rng_seed=i))
        rf = sample_ranking(n, rng.randint(1, min(8, n)), rng.randint(1, n), i)
        v = rng.randrange(n)
        oracle = GraphOracle(g)
        assert relevant_vicinity(oracle, rf, v).members <= containing_vicinity(oracle, rf, v)


def test_containing_budget():
    with pytest.raises(BudgetExceeded):
        containing_vicinity(GraphOracle(star_graph(10)), Levels([1] * 11), 0, budget=5)


# -- statistics ------------------------------------------------------------

def test_stats_on_empty_graph():
    stats = vicinity_stats(Graph.empty(50), 4, 4, 20, 3)
    assert all(r.t_v == 1 and r.t_e == 0 for r in stats.records)
    s = stats.summary()
    assert s["inquiries"] == 60 and s["t_e_sq"]["max"] == 0


def test_stats_records_and_reproducibility():
    g = generate(GeneratorSpec("gnp", n=300, d=3, rng_seed=1))
    a = vicinity_stats(g, 16, 20, 10, 4, d=3, rng_seed=5)
    b = vicinity_stats(g, 16, 20, 10, 4, d=3, rng_seed=5)
    rows = [json.dumps(r.to_json(), sort_keys=True) for r in a.records]
    assert rows == [json.dumps(r.to_json(), sort_keys=True) for r in b.records]
    assert set(a.records[0].to_json()) == {"n", "d", "L", "k", "center", "t_v", "t_e",
                                           "queries", "budget_exceeded"}
    assert all(r.queries == r.t_v for r in a.records)


def test_stats_counts_budget_overruns():
    g = path_graph(100)
    stats = vicinity_stats(g, 1, 1, 30, 1, budget=3)
    s = stats.summary()
    assert s["budget_exceeded"] > 0
    assert s["inquiries"] == 30
