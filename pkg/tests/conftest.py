from __future__ import annotations

from hypothesis import strategies as st

from lcalab.graph import Graph
from lcalab.ordering import sample_ranking


class Levels:
    """Hand-written ranking: ``levels[v]`` is the level of ``v``."""

    def __init__(self, levels, L=None):
        self.levels = list(levels)
        self.n = len(self.levels)
        self.L = L or max(self.levels, default=1)

    def level(self, v):
        return self.levels[v]


def by_order(order):
    """Ranking where ``order[0]`` comes first, ``order[1]`` next, and so on."""
    levels = [0] * len(order)
    for pos, v in enumerate(order):
        levels[v] = pos + 1
    return Levels(levels)


@st.composite
def graphs(draw, min_n=1, max_n=12):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, chosen)


@st.composite
def graph_and_ranking(draw, min_n=1, max_n=12):
    g = draw(graphs(min_n, max_n))
    L = draw(st.integers(1, g.n))
    k = draw(st.integers(1, g.n))
    seed = draw(st.integers(0, 2**32))
    return g, sample_ranking(g.n, L, k, seed)
