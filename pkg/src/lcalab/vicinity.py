"""Relevant-vicinity and containing-vicinity exploration.

The relevant vicinity of ``v`` is the least set containing ``v`` that is
closed under adding neighbors ranked before their discoverer. It is exactly
what an LCA has to read to replay a neighborhood-dependent online algorithm
at ``v``.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Protocol

import numpy as np

from .errors import BudgetExceeded, ParameterError
from .graph import Graph, GraphOracle
from .ordering import sample_ranking

DEFAULT_BUDGET = 10**6


def budget_from_env(default: int = DEFAULT_BUDGET) -> int:
    raw = os.environ.get("LCALAB_BUDGET")
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ParameterError(f"LCALAB_BUDGET must be an integer, got {raw!r}") from None
    if value < 1:
        raise ParameterError("LCALAB_BUDGET must be positive")
    return value


class Ranking(Protocol):
    n: int
    L: int

    def level(self, v: int) -> int: ...


def fast_level(rf: Ranking) -> Callable[[int], int]:
    """Bound level lookup; a plain list index when the table is precomputed."""
    table = getattr(rf, "_table", None)
    return table.__getitem__ if table is not None else rf.level


@dataclass
class Vicinity:
    center: int
    members: frozenset[int]
    queries: int
    # Neighbor lists fetched for members and levels seen during exploration.
    adjacency: dict[int, tuple[int, ...]] = field(default_factory=dict, repr=False, compare=False)
    levels: dict[int, int] = field(default_factory=dict, repr=False, compare=False)

    @property
    def t_v(self) -> int:
        return len(self.members)

    @cached_property
    def adjacent_edges(self) -> frozenset[tuple[int, int]]:
        """Edges with at least one endpoint in ``members``, as ``(min, max)`` pairs."""
        return frozenset(
            (u, w) if u < w else (w, u) for u, nbrs in self.adjacency.items() for w in nbrs
        )

    @cached_property
    def t_e(self) -> int:
        members = self.members
        total = internal = 0
        for nbrs in self.adjacency.values():
            total += len(nbrs)
            internal += sum(1 for w in nbrs if w in members)
        return total - internal // 2


def relevant_vicinity(
    oracle: GraphOracle,
    rf: Ranking,
    v: int,
    *,
    budget: int = DEFAULT_BUDGET,
    order: str = "dfs",
) -> Vicinity:
    """Explore the relevant vicinity of ``v`` with a worklist.

    Every member costs exactly one neighbor query. ``order`` selects a
    depth-first (stack) or breadth-first (queue) worklist; the result does not
    depend on it.
    """
    if order not in ("dfs", "bfs"):
        raise ParameterError(f"order must be 'dfs' or 'bfs', got {order!r}")
    if not 0 <= v < oracle.n:
        raise ParameterError(f"vertex {v} out of range 0..{oracle.n - 1}")
    start = oracle.queries
    level = fast_level(rf)
    lv = {v: level(v)}
    members = {v}
    adjacency: dict[int, tuple[int, ...]] = {}
    work = deque([v])
    pop = work.pop if order == "dfs" else work.popleft
    fetch = oracle.neighbors
    while work:
        u = pop()
        nbrs = fetch(u)
        adjacency[u] = nbrs
        ru = (lv[u], u)
        for w in nbrs:
            lw = lv.get(w)
            if lw is None:
                lw = lv[w] = level(w)
            if (lw, w) < ru and w not in members:
                members.add(w)
                if len(members) > budget:
                    raise BudgetExceeded(v, budget)
                work.append(w)
    return Vicinity(
        center=v,
        members=frozenset(members),
        queries=oracle.queries - start,
        adjacency=adjacency,
        levels=lv,
    )


@dataclass(frozen=True)
class Levelhood:
    base: frozenset[int]
    level: int
    closure: frozenset[int]


class _Explorer:
    """Neighbor and level cache shared across the levelhoods of one exploration."""

    def __init__(self, oracle: GraphOracle, rf: Ranking, budget: int, center: int):
        self.oracle = oracle
        self.rf = rf
        self.budget = budget
        self.center = center
        self.adj: dict[int, tuple[int, ...]] = {}

    def neighbors(self, u: int) -> tuple[int, ...]:
        nbrs = self.adj.get(u)
        if nbrs is None:
            nbrs = self.adj[u] = self.oracle.neighbors(u)
        return nbrs

    def levelhood(self, base: frozenset[int], ell: int) -> Levelhood:
        level = self.rf.level
        closure = set(base)
        work = list(base)
        while work:
            u = work.pop()
            for w in self.neighbors(u):
                if w not in closure and level(w) == ell:
                    closure.add(w)
                    if len(closure) > self.budget:
                        raise BudgetExceeded(self.center, self.budget)
                    work.append(w)
        return Levelhood(base=base, level=ell, closure=frozenset(closure))


def levelhood(
    oracle: GraphOracle, rf: Ranking, base: set[int] | frozenset[int], ell: int,
    *, budget: int = DEFAULT_BUDGET,
) -> Levelhood:
    """Close ``base`` under adding neighbors whose level is exactly ``ell``."""
    base = frozenset(base)
    center = min(base) if base else -1
    return _Explorer(oracle, rf, budget, center).levelhood(base, ell)


def containing_chain(
    oracle: GraphOracle, rf: Ranking, v: int, *, budget: int = DEFAULT_BUDGET
) -> list[Levelhood]:
    """Levelhoods ``S_l = Psi_l({v})``, ``S_{l-1} = Psi_{l-1}(S_l)``, ... down to level 1.

    The composition descends from ``level(v)`` because predecessors of a
    vertex never sit at a higher level; see :func:`containing_vicinity`.
    """
    if not 0 <= v < oracle.n:
        raise ParameterError(f"vertex {v} out of range 0..{oracle.n - 1}")
    ex = _Explorer(oracle, rf, budget, v)
    current = frozenset([v])
    chain = []
    for ell in range(rf.level(v), 0, -1):
        hood = ex.levelhood(current, ell)
        chain.append(hood)
        current = hood.closure
    return chain


def containing_vicinity(
    oracle: GraphOracle, rf: Ranking, v: int, *, budget: int = DEFAULT_BUDGET
) -> frozenset[int]:
    """Worst-case superset of the relevant vicinity.

    Same-level neighbors are always admitted regardless of id, and levels are
    processed from ``level(v)`` downwards so every non-increasing level path
    out of ``v`` is covered.
    """
    return containing_chain(oracle, rf, v, budget=budget)[-1].closure


# -- statistics ------------------------------------------------------------

@dataclass
class VicinityRecord:
    n: int
    d: float
    L: int
    k: int
    center: int
    t_v: int
    t_e: int
    queries: int
    budget_exceeded: bool
    seed_hex: str = ""

    def to_json(self) -> dict:
        return {
            "n": self.n, "d": self.d, "L": self.L, "k": self.k, "center": self.center,
            "t_v": self.t_v, "t_e": self.t_e, "queries": self.queries,
            "budget_exceeded": self.budget_exceeded,
        }


@dataclass
class VicinityStats:
    records: list[VicinityRecord]

    def _values(self, attr: str) -> np.ndarray:
        return np.array(
            [getattr(r, attr) for r in self.records if not r.budget_exceeded], dtype=float
        )

    def summary(self) -> dict:
        out = {"inquiries": len(self.records),
               "budget_exceeded": sum(r.budget_exceeded for r in self.records)}
        t_e = self._values("t_e")
        for name, vals in (("t_v", self._values("t_v")), ("t_e", t_e),
                           ("t_e_sq", t_e**2), ("queries", self._values("queries"))):
            if vals.size == 0:
                continue
            out[name] = {
                "mean": float(vals.mean()),
                "max": float(vals.max()),
                "q50": float(np.quantile(vals, 0.5)),
                "q90": float(np.quantile(vals, 0.9)),
                "q99": float(np.quantile(vals, 0.99)),
            }
        return out


def trial_seed(master: int, index: int) -> bytes:
    """Hash seed of trial ``index``; independent of scheduling order."""
    return master.to_bytes(8, "big") + index.to_bytes(8, "big")


def vicinity_stats(
    graph: Graph,
    L: int,
    k: int,
    sample_size: int,
    trials: int,
    *,
    d: float = 0.0,
    rng_seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> VicinityStats:
    """Explore ``sample_size`` random centers under each of ``trials`` hash seeds."""
    if sample_size < 1 or trials < 1:
        raise ParameterError("need sample_size >= 1 and trials >= 1")
    if graph.n == 0:
        raise ParameterError("graph has no vertices")
    rng = np.random.default_rng(rng_seed)
    oracle = GraphOracle(graph)
    records = []
    for trial in range(trials):
        rf = sample_ranking(graph.n, L, k, trial_seed(rng_seed, trial))
        for center in rng.integers(0, graph.n, size=sample_size).tolist():
            oracle.reset()
            try:
                vic = relevant_vicinity(oracle, rf, center, budget=budget)
            except BudgetExceeded:
                records.append(VicinityRecord(graph.n, d, L, k, center, 0, 0, oracle.queries,
                                              True, rf.seed_hex))
                continue
            records.append(VicinityRecord(graph.n, d, L, k, center, vic.t_v, vic.t_e,
                                          vic.queries, False, rf.seed_hex))
    return VicinityStats(records)
