from __future__ import annotations

import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings

from lcalab.errors import GraphParseError, ParameterError
from lcalab.graph import (GeneratorSpec, Graph, GraphOracle, LineGraph, complete_graph,
                          complete_tree, exposure_neighborhood_experiment, generate, line_graph,
                          load_graph, mean_degree, path_graph, save_graph, star_graph,
                          tree_depths)

from conftest import graphs


def test_from_edges_sorts_and_symmetrizes():
    g = Graph.from_edges(4, [(2, 0), (0, 1), (3, 2)])
    assert g.adjacency == ((1, 2), (0,), (0, 3), (2,))
    assert g.m == 3
    assert list(g.edges()) == [(0, 1), (0, 2), (2, 3)]


@pytest.mark.parametrize("n, adj", [
    (2, [(1,), ()]),          # asymmetric
    (2, [(0,), ()]),          # self loop
    (3, [(2, 1), (0,), (0,)]),  # unsorted
    (2, [(5,), ()]),          # out of range
])
def test_invalid_adjacency_rejected(n, adj):
    with pytest.raises(ParameterError):
        Graph(n, adj)


def test_duplicate_and_loop_edges_rejected():
    with pytest.raises(ParameterError):
        Graph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(ParameterError):
        Graph.from_edges(3, [(1, 1)])


@given(graphs(max_n=15))
def test_edge_ids_are_dense_and_lexicographic(g):
    edges = list(g.edges())
    assert edges == sorted(edges)
    for e, (u, v) in enumerate(edges):
        assert g.edge_id(u, v) == e == g.edge_id(v, u)
        assert g.edge_endpoints(e) == (u, v)
    for u in range(g.n):
        assert [g.edge_id(u, w) for w in g.adjacency[u]] == list(g.incident_edges(u))


@given(graphs(max_n=10))
def test_implicit_line_graph_matches_networkx(g):
    ours = line_graph(g)
    ref = nx.line_graph(nx.Graph(list(g.edges())))
    ids = {e: i for i, e in enumerate(g.edges())}
    ids.update({(v, u): i for (u, v), i in list(ids.items())})
    expected = {(min(ids[a], ids[b]), max(ids[a], ids[b])) for a, b in ref.edges()}
    assert set(ours.edges()) == expected


def test_edge_id_of_non_edge():
    with pytest.raises(ParameterError):
        path_graph(3).edge_id(0, 2)


def test_oracle_counts_and_is_pure():
    g = star_graph(3)
    o = GraphOracle(g, record=True)
    assert o.neighbors(0) == o.neighbors(0) == (1, 2, 3)
    assert o.queries == 2 and o.fetched == [0, 0]
    o.reset()
    assert o.queries == 0 and o.fetched == []
    with pytest.raises(ParameterError):
        o.neighbors(4)


def test_oracle_over_line_graph_has_edge_domain():
    o = GraphOracle(LineGraph(path_graph(4)))
    assert o.domain == "edge" and o.n == 3
    assert o.neighbors(1) == (0, 2)


def test_builders():
    assert complete_graph(4).m == 6
    t = complete_tree(2, 2)
    assert t.n == 7 and t.adjacency[0] == (1, 2) and t.adjacency[2] == (0, 5, 6)
    assert tree_depths(2, 2) == [0, 1, 1, 2, 2, 2, 2]
    assert complete_tree(3, 0).n == 1


# -- generators ------------------------------------------------------------

@pytest.mark.parametrize("n, d", [(10, 3), (1000, 3), (64, 4), (50, 0), (20, 1)])
def test_regular_graphs_are_regular(n, d):
    g = generate(GeneratorSpec("regular", n=n, d=d, rng_seed=5))
    assert all(g.degree(v) == d for v in range(g.n))


@pytest.mark.parametrize("spec", [
    GeneratorSpec("regular", n=5, d=3),
    GeneratorSpec("regular", n=4, d=4),
    GeneratorSpec("gnp", n=10, d=10),
    GeneratorSpec("bipartite", n=10, d=4, m=3),
    GeneratorSpec("tree", d=0, depth=2),
    GeneratorSpec("tree", d=2),
    GeneratorSpec("torus", n=4),
    GeneratorSpec("path", n=0),
])
def test_invalid_specs(spec):
    with pytest.raises(ParameterError):
        generate(spec)


def test_gnp_mean_degree_within_five_standard_errors():
    n, d, seeds = 2000, 3.0, 20
    p = d / (n - 1)
    total_pairs = n * (n - 1) // 2
    degs = [mean_degree(generate(GeneratorSpec("gnp", n=n, d=d, rng_seed=s))) for s in range(seeds)]
    # Mean degree is 2*Bin(C(n,2), p)/n; its SE over `seeds` graphs:
    se = 2 * math.sqrt(total_pairs * p * (1 - p)) / n / math.sqrt(seeds)
    assert abs(np.mean(degs) - d) < 5 * se


def test_bipartite_degrees():
    n, m, d = 5000, 500, 3
    g = generate(GeneratorSpec("bipartite", n=n, m=m, d=d, rng_seed=3))
    assert g.n == n + m
    assert all(g.degree(v) == d for v in range(n))
    assert all(w >= n for v in range(n) for w in g.adjacency[v])
    prod = np.array([g.degree(v) for v in range(n, n + m)], dtype=float)
    mean, var = n * d / m, n * (d / m) * (1 - d / m)
    assert abs(prod.mean() - mean) < 5 * math.sqrt(var / m)


def test_generation_is_reproducible():
    spec = GeneratorSpec("gnp", n=500, d=3, rng_seed=11)
    assert generate(spec) == generate(spec)
    assert generate(spec) != generate(GeneratorSpec("gnp", n=500, d=3, rng_seed=12))


def test_path_model():
    assert generate(GeneratorSpec("path", n=4)) == path_graph(4)


# -- file format -----------------------------------------------------------

@given(graphs(max_n=10))
@settings(max_examples=30)
def test_file_round_trip(tmp_path_factory, g):
    path = tmp_path_factory.mktemp("g") / "g.txt"
    save_graph(g, path)
    assert load_graph(path) == g


@pytest.mark.parametrize("text, lineno", [
    ("", 1),
    ("3\n", 1),
    ("3 x\n", 1),
    ("3 2\n0 1\n", 2),
    ("3 1\n0 1 2\n", 2),
    ("3 1\n0 3\n", 2),
    ("3 1\n1 1\n", 2),
    ("3 2\n0 1\n1 0\n", 3),
])
def test_parse_errors_carry_line_numbers(tmp_path, text, lineno):
    p = tmp_path / "bad.txt"
    p.write_text(text)
    with pytest.raises(GraphParseError) as exc:
        load_graph(p)
    assert exc.value.lineno == lineno
    assert str(exc.value).startswith(f"line {lineno}:")


# -- exposure --------------------------------------------------------------

def test_exposure_regular_ratio_at_most_one():
    g = generate(GeneratorSpec("regular", n=400, d=3, rng_seed=1))
    rep = exposure_neighborhood_experiment(g, 3, 20, 50, rng_seed=2)
    assert rep.max_ratio <= 1 and rep.exceed_fraction == 0


def test_exposure_single_vertex_of_k4():
    rep = exposure_neighborhood_experiment(complete_graph(4), 3, 1, 5)
    assert rep.ratios == [1.0] * 5


def test_exposure_gnp_never_exceeds_six():
    g = generate(GeneratorSpec("gnp", n=4096, d=3, rng_seed=4))
    rep = exposure_neighborhood_experiment(g, 3, 64, 1000, rng_seed=4)
    assert rep.exceed_fraction == 0


def test_exposure_needs_large_component():
    with pytest.raises(ParameterError):
        exposure_neighborhood_experiment(path_graph(3), 1, 4, 1)


def test_regular_retry_budget_scales_with_degree():
    from lcalab.graph import regular_retry_budget

    assert regular_retry_budget(1) == 100
    assert regular_retry_budget(3) == 148
    assert regular_retry_budget(4) == 851
    assert regular_retry_budget(12) == 10**5
    # Degree 4 needs about 42 attempts on average; every seed here must succeed.
    for seed in range(30):
        g = generate(GeneratorSpec("regular", n=268, d=4, rng_seed=seed))
        assert all(g.degree(v) == 4 for v in range(g.n))
