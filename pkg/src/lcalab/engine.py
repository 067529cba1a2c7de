"""Neighborhood-dependent online algorithms and the two LCA constructions.

An online algorithm here is just a pure ``decide(x, earlier)`` function where
``earlier`` lists ``(neighbor, value)`` for the neighbors of ``x`` that arrived
before it, in arrival order. Replaying ``decide`` over the relevant vicinity
in rank order reproduces the value the global run would assign.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence

import numpy as np

from .errors import BudgetExceeded, ParameterError
from .graph import Graph, GraphOracle, LineGraph
from .ordering import RankingFunction
from .vicinity import DEFAULT_BUDGET, Ranking, fast_level, relevant_vicinity

IN, OUT = "IN", "OUT"
MATCHED, UNMATCHED = "MATCHED", "UNMATCHED"

Earlier = Sequence[tuple[int, Hashable]]


def greedy_mis_decide(v: int, earlier: Earlier) -> str:
    return OUT if any(val == IN for _, val in earlier) else IN


def greedy_matching_decide(e: int, earlier: Earlier) -> str:
    return UNMATCHED if any(val == MATCHED for _, val in earlier) else MATCHED


def greedy_coloring_decide(v: int, earlier: Earlier) -> int:
    used = {val for _, val in earlier}
    color = 1
    while color in used:
        color += 1
    return color


@dataclass(frozen=True)
class OnlineAlgorithm:
    name: str
    domain: str  # "vertex" or "edge"
    decide: Callable[[int, Earlier], Hashable]


MIS = OnlineAlgorithm("mis", "vertex", greedy_mis_decide)
MATCHING = OnlineAlgorithm("matching", "edge", greedy_matching_decide)
COLORING = OnlineAlgorithm("coloring", "vertex", greedy_coloring_decide)
ALGORITHMS = {a.name: a for a in (MIS, MATCHING, COLORING)}


def get_algorithm(name: str) -> OnlineAlgorithm:
    try:
        return ALGORITHMS[name]
    except KeyError:
        raise ParameterError(f"unknown problem {name!r}; choose from {sorted(ALGORITHMS)}") from None


def structure_for(graph: Graph, alg: OnlineAlgorithm) -> Graph | LineGraph:
    """The graph the algorithm walks: ``graph`` itself or its implicit line graph."""
    return graph if alg.domain == "vertex" else LineGraph(graph)


def structure_degree(structure: Graph | LineGraph) -> float:
    """Mean degree of the walked structure; used as ``d`` for default ranking parameters."""
    if isinstance(structure, LineGraph):
        g = structure.graph
        if g.m == 0:
            return 0.0
        return sum(g.degree(u) * (g.degree(u) - 1) for u in range(g.n)) / g.m
    return 2 * structure.m / structure.n if structure.n else 0.0


@dataclass
class InquiryResult:
    vertex: int
    output: Hashable
    t_v: int
    t_e: int
    queries: int
    time_ns: int
    peak_words: int

    def to_json(self, *, timing: bool = True) -> dict:
        return {
            "vertex": self.vertex, "output": self.output, "t_v": self.t_v, "t_e": self.t_e,
            "queries": self.queries, "time_ns": self.time_ns if timing else None,
            "peak_words": self.peak_words,
        }


def _check_inputs(oracle: GraphOracle, rf: Ranking, alg: OnlineAlgorithm, v: int) -> None:
    if oracle.domain != alg.domain:
        raise ParameterError(f"{alg.name} works on {alg.domain} ids but the oracle serves {oracle.domain} ids")
    if rf.n != oracle.n:
        raise ParameterError(f"ranking covers {rf.n} ids but the oracle has {oracle.n}")
    if not 0 <= v < oracle.n:
        raise ParameterError(f"inquiry {v} out of range 0..{oracle.n - 1}")


def _word_bits(n: int) -> int:
    return max(1, math.ceil(math.log2(max(n, 2))))


def lca_answer_method1(
    oracle: GraphOracle, rf: Ranking, alg: OnlineAlgorithm, v: int,
    *, budget: int = DEFAULT_BUDGET,
) -> InquiryResult:
    """Answer inquiry ``v`` by relabeling the vicinity with full ranks.

    Explores the relevant vicinity, sorts it by ``(level, id)`` and replays
    ``alg`` in that order. Starts a fresh query session on ``oracle``.
    """
    _check_inputs(oracle, rf, alg, v)
    t0 = time.perf_counter_ns()
    oracle.reset()
    vic = relevant_vicinity(oracle, rf, v, budget=budget)
    lv = vic.levels
    adj = vic.adjacency
    out: dict[int, Hashable] = {}
    for u in sorted(vic.members, key=lambda x: (lv[x], x)):
        ru = (lv[u], u)
        earlier = sorted(((lv[w], w) for w in adj[u] if (lv[w], w) < ru))
        out[u] = alg.decide(u, [(w, out[w]) for _, w in earlier])
    elapsed = time.perf_counter_ns() - t0
    # Counted words: one per label field, adjacency entry and output.
    words = 2 * len(lv) + sum(len(a) for a in adj.values()) + len(out)
    return InquiryResult(v, out[v], vic.t_v, vic.t_e, oracle.queries, elapsed, words)


@dataclass
class ShortLabelState:
    """Method 2 bookkeeping after discovery.

    ``ids[i - 1]`` is the vertex with label ``i``. ``d1[i - 1]`` lists the
    edges of label ``i`` into the labeled set as ``(other label, position
    among the source's edges, direction)`` with direction 1 when the other
    end was already labeled during the scan of ``i`` and 0 when it was
    labeled later.
    ``d2_level`` and ``d2_links`` describe the unlabeled frontier.
    """

    ids: list[int]
    d1: list[list[tuple[int, int, int]]]
    d2_level: dict[int, int]
    d2_links: dict[int, list[tuple[int, int]]]
    max_deg: int

    @property
    def t_v(self) -> int:
        return len(self.ids)

    @property
    def t_e(self) -> int:
        # Each internal edge is stored at both endpoints.
        return sum(len(x) for x in self.d1) // 2 + sum(len(x) for x in self.d2_links.values())


def method2_discover(oracle: GraphOracle, rf: Ranking, v: int, *,
                     budget: int = DEFAULT_BUDGET) -> ShortLabelState:
    """Assign short labels in descending rank order, starting with ``v`` as label 1.

    Each round takes the highest-ranked frontier vertex that precedes at
    least one labeled neighbor and gives it the next label. Eligible
    frontier vertices wait in a max-heap; eligibility never lapses, so the
    heap top is always the next label.
    """
    level = fast_level(rf)
    ids = [v]
    label_of = {v: 1}
    ranks = [(level(v), v)]
    d1: list[list[tuple[int, int, int]]] = [[]]
    d2_level: dict[int, int] = {}
    d2_links: dict[int, list[tuple[int, int]]] = {}
    eligible: list[tuple[int, int]] = []
    max_deg = 0

    def absorb(u: int, label: int) -> None:
        nonlocal max_deg
        nbrs = oracle.neighbors(u)
        max_deg = max(max_deg, len(nbrs))
        ru = ranks[label - 1]
        for pos, w in enumerate(nbrs):
            other = label_of.get(w)
            if other is not None:
                d1[label - 1].append((other, pos, 1))
                continue
            lw = d2_level.get(w)
            if lw is None:
                lw = d2_level[w] = level(w)
                d2_links[w] = []
            links = d2_links[w]
            newly = (lw, w) < ru and not any((lw, w) < ranks[lab - 1] for lab, _ in links)
            links.append((label, pos))
            if newly:
                heapq.heappush(eligible, (-lw, -w))

    absorb(v, 1)
    while eligible:
        neg_level, neg_id = heapq.heappop(eligible)
        best = -neg_id
        label = len(ids) + 1
        if label > budget:
            raise BudgetExceeded(v, budget)
        ids.append(best)
        label_of[best] = label
        ranks.append((-neg_level, best))
        del d2_level[best]
        d1.append([])
        for src, pos in d2_links.pop(best):
            d1[src - 1].append((label, pos, 0))
        absorb(best, label)
    return ShortLabelState(ids, d1, d2_level, d2_links, max_deg)


def lca_answer_method2(
    oracle: GraphOracle, rf: Ranking, alg: OnlineAlgorithm, v: int,
    *, budget: int = DEFAULT_BUDGET,
) -> InquiryResult:
    """Answer inquiry ``v`` over short labels, replaying in reverse label order.

    Discovery is :func:`method2_discover`; the replay only ever touches
    labels, never full ranks. Starts a fresh query session on ``oracle``.
    """
    _check_inputs(oracle, rf, alg, v)
    t0 = time.perf_counter_ns()
    oracle.reset()
    st = method2_discover(oracle, rf, v, budget=budget)
    ids, d1 = st.ids, st.d1
    t_v = st.t_v
    out: list[Hashable] = [None] * (t_v + 1)
    for label in range(t_v, 0, -1):
        earlier = sorted((lab for lab, _, _ in d1[label - 1] if lab > label), reverse=True)
        out[label] = alg.decide(ids[label - 1], [(ids[lab - 1], out[lab]) for lab in earlier])
    elapsed = time.perf_counter_ns() - t0

    d1_entries = sum(len(x) for x in d1)
    d2_entries = sum(len(x) for x in st.d2_links.values())
    label_bits = max(1, math.ceil(math.log2(t_v + 1)))
    pos_bits = max(1, math.ceil(math.log2(st.max_deg + 1)))
    level_bits = max(1, math.ceil(math.log2(rf.L + 1)))
    out_bits = sum(max(1, int(x).bit_length()) if isinstance(x, int) else 1 for x in out[1:])
    bits = (d1_entries * (label_bits + pos_bits + 1)
            + len(st.d2_level) * level_bits + d2_entries * (label_bits + pos_bits + 1)
            + out_bits)
    words = math.ceil(bits / _word_bits(oracle.n))
    return InquiryResult(v, out[1], t_v, st.t_e, oracle.queries, elapsed, words)


METHODS = {1: lca_answer_method1, 2: lca_answer_method2}


def lca_answer(
    oracle: GraphOracle, rf: Ranking, alg: OnlineAlgorithm, v: int,
    *, method: int = 1, budget: int = DEFAULT_BUDGET,
) -> InquiryResult:
    try:
        fn = METHODS[method]
    except KeyError:
        raise ParameterError(f"method must be 1 or 2, got {method}") from None
    return fn(oracle, rf, alg, v, budget=budget)


def rank_order(rf: Ranking, size: int) -> list[int]:
    """All ids ``0..size-1`` sorted by rank."""
    if isinstance(rf, RankingFunction):
        levels = rf.levels()
        return np.lexsort((np.arange(size), levels)).tolist()
    return sorted(range(size), key=lambda x: (rf.level(x), x))


def global_online_run(graph: Graph, rf: Ranking, alg: OnlineAlgorithm) -> dict[int, Hashable]:
    """Run ``alg`` over every vertex (or edge) in rank order; the consistency oracle."""
    structure = structure_for(graph, alg)
    if rf.n != structure.n:
        raise ParameterError(f"ranking covers {rf.n} ids but the {alg.domain} set has {structure.n}")
    level = rf.level
    out: dict[int, Hashable] = {}
    for x in rank_order(rf, structure.n):
        earlier = sorted((level(w), w) for w in structure.neighbors(x) if w in out)
        out[x] = alg.decide(x, [(w, out[w]) for _, w in earlier])
    return out


def verify_assignment(graph: Graph, problem: str, assignment: dict[int, Hashable]) -> list[tuple]:
    """Check feasibility of a total assignment; returns violations, empty if ok.

    Violations are tuples ``(kind, where)``.
    """
    alg = get_algorithm(problem)
    size = graph.n if alg.domain == "vertex" else graph.m
    missing = [x for x in range(size) if x not in assignment]
    if missing:
        return [("missing", x) for x in missing]
    bad: list[tuple] = []
    if problem == "mis":
        for u, w in graph.edges():
            if assignment[u] == IN and assignment[w] == IN:
                bad.append(("adjacent-in", (u, w)))
        for u in range(graph.n):
            val = assignment[u]
            if val not in (IN, OUT):
                bad.append(("bad-value", u))
            elif val == OUT and not any(assignment[w] == IN for w in graph.adjacency[u]):
                bad.append(("not-maximal", u))
    elif problem == "matching":
        covered = [0] * graph.n
        for e in range(graph.m):
            val = assignment[e]
            if val not in (MATCHED, UNMATCHED):
                bad.append(("bad-value", e))
            elif val == MATCHED:
                a, b = graph.edge_endpoints(e)
                covered[a] += 1
                covered[b] += 1
        bad.extend(("shared-endpoint", u) for u in range(graph.n) if covered[u] > 1)
        for e in range(graph.m):
            a, b = graph.edge_endpoints(e)
            if assignment[e] == UNMATCHED and not covered[a] and not covered[b]:
                bad.append(("not-maximal", e))
    else:
        top = graph.max_degree() + 1
        for u, w in graph.edges():
            if assignment[u] == assignment[w]:
                bad.append(("conflict", (u, w)))
        for u in range(graph.n):
            c = assignment[u]
            if not isinstance(c, int) or not 1 <= c <= top:
                bad.append(("out-of-range", u))
    return bad
