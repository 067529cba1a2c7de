"""Graphs, query oracles, random d-light graph families and the text file format.

Vertices are dense integers ``0..n-1``. A :class:`Graph` is immutable; all
locality accounting happens in :class:`GraphOracle`, which wraps any
structure exposing ``n`` and ``neighbors(x)`` (a :class:`Graph` or the
implicit :class:`LineGraph` used for edge problems).
"""

from __future__ import annotations

import math
import os
from bisect import bisect_left, bisect_right
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import GenerationError, GraphParseError, ParameterError

REGULAR_RETRY_FLOOR = 100
REGULAR_RETRY_CAP = 10**5
MODELS = ("regular", "gnp", "bipartite", "tree", "path")


class Graph:
    """Undirected simple graph stored as sorted adjacency tuples."""

    __slots__ = ("n", "adjacency", "m", "_edge_offset", "_incident")

    domain = "vertex"

    def __init__(self, n: int, adjacency: Sequence[Sequence[int]], *, check: bool = True):
        if n < 0:
            raise ParameterError(f"vertex count must be non-negative, got {n}")
        if len(adjacency) != n:
            raise ParameterError(f"expected {n} adjacency lists, got {len(adjacency)}")
        self.n = n
        self.adjacency: tuple[tuple[int, ...], ...] = tuple(tuple(a) for a in adjacency)
        total = sum(len(a) for a in self.adjacency)
        if check:
            self._validate()
        self.m = total // 2
        self._edge_offset: list[int] | None = None
        self._incident: tuple[tuple[int, ...], ...] | None = None

    def _validate(self) -> None:
        adj = self.adjacency
        for v, nbrs in enumerate(adj):
            prev = -1
            for w in nbrs:
                if not 0 <= w < self.n:
                    raise ParameterError(f"neighbor {w} of {v} out of range")
                if w == v:
                    raise ParameterError(f"self-loop at {v}")
                if w <= prev:
                    raise ParameterError(f"adjacency of {v} not strictly increasing")
                prev = w
        for v, nbrs in enumerate(adj):
            for w in nbrs:
                a = adj[w]
                i = bisect_left(a, v)
                if i == len(a) or a[i] != v:
                    raise ParameterError(f"asymmetric adjacency: {w} in N({v}) but not vice versa")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build from an edge iterable; rejects self-loops, duplicates and bad ids."""
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        return cls.from_edge_arrays(n, arr[:, 0], arr[:, 1])

    @classmethod
    def from_edge_arrays(cls, n: int, u: np.ndarray, v: np.ndarray) -> "Graph":
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if u.size:
            if min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n:
                raise ParameterError(f"edge endpoint out of range 0..{n - 1}")
            if (u == v).any():
                bad = int(u[u == v][0])
                raise ParameterError(f"self-loop at {bad}")
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        keys = lo * max(n, 1) + hi
        if np.unique(keys).size != keys.size:
            raise ParameterError("duplicate edge")
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src = src[order]
        flat = dst[order].tolist()
        bounds = np.searchsorted(src, np.arange(n + 1)).tolist()
        adjacency = [tuple(flat[bounds[i]:bounds[i + 1]]) for i in range(n)]
        return cls(n, adjacency, check=False)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, [()] * n, check=False)

    # -- queries ----------------------------------------------------------

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges ``(u, v)`` with ``u < v`` in lexicographic order."""
        for u, nbrs in enumerate(self.adjacency):
            for w in nbrs[bisect_right(nbrs, u):]:
                yield (u, w)

    def has_edge(self, u: int, v: int) -> bool:
        a = self.adjacency[u]
        i = bisect_left(a, v)
        return i < len(a) and a[i] == v

    def _offsets(self) -> list[int]:
        if self._edge_offset is None:
            off = [0]
            for u, nbrs in enumerate(self.adjacency):
                off.append(off[-1] + len(nbrs) - bisect_right(nbrs, u))
            self._edge_offset = off
        return self._edge_offset

    def edge_id(self, u: int, v: int) -> int:
        """Dense id of edge ``{u, v}`` in lexicographic edge order."""
        if u > v:
            u, v = v, u
        a = self.adjacency[u]
        i = bisect_left(a, v)
        if u == v or i == len(a) or a[i] != v:
            raise ParameterError(f"({u}, {v}) is not an edge")
        return self._offsets()[u] + i - bisect_right(a, u)

    def incident_edges(self, u: int) -> tuple[int, ...]:
        """Edge ids aligned with ``adjacency[u]``."""
        if self._incident is None:
            self._incident = self._build_incident()
        return self._incident[u]

    def _build_incident(self) -> tuple[tuple[int, ...], ...]:
        n = max(self.n, 1)
        lens = np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.n)
        src = np.repeat(np.arange(self.n, dtype=np.int64), lens)
        dst = np.fromiter((w for a in self.adjacency for w in a), dtype=np.int64, count=int(lens.sum()))
        keys = np.minimum(src, dst) * n + np.maximum(src, dst)
        canonical = keys[src < dst]  # already in lexicographic order
        flat = np.searchsorted(canonical, keys).tolist()
        bounds = np.concatenate([[0], np.cumsum(lens)]).tolist()
        return tuple(tuple(flat[bounds[i]:bounds[i + 1]]) for i in range(self.n))

    def edge_endpoints(self, e: int) -> tuple[int, int]:
        if not 0 <= e < self.m:
            raise ParameterError(f"edge id {e} out of range 0..{self.m - 1}")
        off = self._offsets()
        u = bisect_right(off, e) - 1
        a = self.adjacency[u]
        return u, a[bisect_right(a, u) + e - off[u]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.adjacency == other.adjacency

    def __hash__(self) -> int:
        return hash((self.n, self.adjacency))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


class LineGraph:
    """Implicit line graph: vertex ``e`` is edge ``e`` of the base graph.

    Adjacent edge ids are computed on demand from the two endpoints'
    neighbor lists, so the line graph is never materialized.
    """

    domain = "edge"

    def __init__(self, graph: Graph):
        self.graph = graph
        self.n = graph.m
        self._memo: dict[int, tuple[int, ...]] = {}

    def neighbors(self, e: int) -> tuple[int, ...]:
        out = self._memo.get(e)
        if out is None:
            g = self.graph
            a, b = g.edge_endpoints(e)
            nbrs = [f for f in g.incident_edges(a) if f != e]
            nbrs.extend(f for f in g.incident_edges(b) if f != e)
            nbrs.sort()
            out = self._memo[e] = tuple(nbrs)
        return out


def line_graph(graph: Graph) -> Graph:
    """Materialize the line graph explicitly (small graphs only)."""
    implicit = LineGraph(graph)
    return Graph(graph.m, [implicit.neighbors(e) for e in range(graph.m)])


class GraphOracle:
    """Neighbor-query access with a per-session query counter.

    ``record=True`` additionally keeps the ids fetched this session.
    """

    def __init__(self, structure: Graph | LineGraph, *, record: bool = False):
        self.graph = structure
        self.queries = 0
        self.fetched: list[int] | None = [] if record else None

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def domain(self) -> str:
        return self.graph.domain

    def reset(self) -> None:
        self.queries = 0
        if self.fetched is not None:
            self.fetched = []

    def neighbors(self, v: int) -> tuple[int, ...]:
        if not 0 <= v < self.graph.n:
            raise ParameterError(f"vertex {v} out of range 0..{self.graph.n - 1}")
        self.queries += 1
        if self.fetched is not None:
            self.fetched.append(v)
        return self.graph.neighbors(v)


# -- simple builders -------------------------------------------------------

def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def complete_graph(n: int) -> Graph:
    return Graph(n, [tuple(w for w in range(n) if w != v) for v in range(n)], check=False)


def star_graph(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, ((0, i) for i in range(1, leaves + 1)))


# -- random families -------------------------------------------------------

@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of one of the d-light families.

    For ``bipartite``, ``n`` counts consumers and ``m`` producers; the
    produced graph has ``n + m`` vertices with consumers first. For
    ``tree``, ``n`` is ignored and the size follows from ``d`` and ``depth``;
    ``path`` ignores ``d``.
    """

    model: str
    n: int = 0
    d: float = 0
    m: int | None = None
    depth: int | None = None
    rng_seed: int = 0

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ParameterError(f"model must be one of {MODELS}, got {self.model!r}")
        if not 0 <= self.rng_seed < 2**64:
            raise ParameterError("rng_seed must fit in 64 bits")
        if self.model == "regular":
            d = _as_int(self.d, "d")
            if self.n < 1:
                raise ParameterError("regular: n must be >= 1")
            if not 0 <= d < self.n:
                raise ParameterError(f"regular: need 0 <= d < n, got d={d}, n={self.n}")
            if (self.n * d) % 2:
                raise ParameterError(f"regular: n*d must be even, got n={self.n}, d={d}")
        elif self.model == "gnp":
            if self.n < 1:
                raise ParameterError("gnp: n must be >= 1")
            if not 0 <= self.d <= max(self.n - 1, 0):
                raise ParameterError(f"gnp: need 0 <= d <= n-1, got d={self.d}, n={self.n}")
        elif self.model == "bipartite":
            d = _as_int(self.d, "d")
            if self.m is None or self.m < 1:
                raise ParameterError("bipartite: producer count m must be >= 1")
            if self.n < 0:
                raise ParameterError("bipartite: n must be >= 0")
            if not 0 <= d <= self.m:
                raise ParameterError(f"bipartite: need d <= m, got d={d}, m={self.m}")
        elif self.model == "path":
            if self.n < 1:
                raise ParameterError("path: n must be >= 1")
        else:
            d = _as_int(self.d, "d")
            if d < 1:
                raise ParameterError(f"tree: need d >= 1, got {d}")
            if self.depth is None or self.depth < 0:
                raise ParameterError("tree: need depth >= 0")


def _as_int(x: float, name: str) -> int:
    if int(x) != x:
        raise ParameterError(f"{name} must be an integer for this model, got {x}")
    return int(x)


def generate(spec: GeneratorSpec) -> Graph:
    """Sample a graph from ``spec``; reproducible from ``spec.rng_seed``."""
    spec.validate()
    rng = np.random.default_rng(spec.rng_seed)
    if spec.model == "regular":
        return _random_regular(spec.n, int(spec.d), rng)
    if spec.model == "gnp":
        return _gnp(spec.n, float(spec.d), rng)
    if spec.model == "bipartite":
        return _bipartite(spec.n, spec.m, int(spec.d), rng)
    if spec.model == "path":
        return path_graph(spec.n)
    return complete_tree(int(spec.d), spec.depth)


def regular_retry_budget(d: int) -> int:
    """Pairing attempts allowed for degree ``d``.

    A pairing is simple with probability about ``exp(-(d^2-1)/4)``, so the
    budget is 20 times the expected number of attempts, within fixed bounds.
    """
    expected = math.exp((d * d - 1) / 4)
    return int(min(REGULAR_RETRY_CAP, max(REGULAR_RETRY_FLOOR, math.ceil(20 * expected))))


def _random_regular(n: int, d: int, rng: np.random.Generator) -> Graph:
    # Pairing model: shuffle the n*d stubs, pair neighbors, reject on any defect.
    if d == 0:
        return Graph.empty(n)
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    budget = regular_retry_budget(d)
    for _ in range(budget):
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        lo = pairs.min(axis=1)
        hi = pairs.max(axis=1)
        if (lo == hi).any():
            continue
        keys = lo * n + hi
        if np.unique(keys).size != keys.size:
            continue
        return Graph.from_edge_arrays(n, lo, hi)
    raise GenerationError(
        f"no simple {d}-regular pairing on {n} vertices after {budget} attempts"
    )


def _gnp(n: int, d: float, rng: np.random.Generator) -> Graph:
    # The number of present pairs is Binomial(C(n,2), p); given that count,
    # the present set is a uniform subset, which is exactly G(n, p).
    if n < 2 or d == 0:
        return Graph.empty(n)
    p = d / (n - 1)
    total = n * (n - 1) // 2
    count = int(rng.binomial(total, p))
    flat = rng.choice(total, size=count, replace=False)
    flat.sort()
    # Row u of the upper triangle starts at u*n - u*(u+1)/2.
    rows = np.arange(n, dtype=np.int64)
    starts = rows * n - rows * (rows + 1) // 2
    u = np.searchsorted(starts, flat, side="right") - 1
    v = flat - starts[u] + u + 1
    return Graph.from_edge_arrays(n, u, v)


def _bipartite(n: int, m: int, d: int, rng: np.random.Generator) -> Graph:
    if d == 0 or n == 0:
        return Graph.empty(n + m)
    if 2 * d > m or n * m <= 2_000_000:
        picks = np.argsort(rng.random((n, m)), axis=1)[:, :d]
    else:
        picks = rng.integers(0, m, size=(n, d))
        while True:
            s = np.sort(picks, axis=1)
            bad = (s[:, 1:] == s[:, :-1]).any(axis=1)
            if not bad.any():
                break
            picks[bad] = rng.integers(0, m, size=(int(bad.sum()), d))
    consumers = np.repeat(np.arange(n, dtype=np.int64), d)
    producers = picks.reshape(-1).astype(np.int64) + n
    return Graph.from_edge_arrays(n + m, consumers, producers)


def complete_tree(d: int, depth: int) -> Graph:
    """Complete d-ary tree; vertex 0 is the root, children of i are d*i+1..d*i+d."""
    size = sum(d**i for i in range(depth + 1))
    return Graph.from_edges(size, (((i - 1) // d, i) for i in range(1, size)))


def tree_depths(d: int, depth: int) -> list[int]:
    """Depth of every vertex of :func:`complete_tree` in id order."""
    out = []
    for lvl in range(depth + 1):
        out.extend([lvl] * d**lvl)
    return out


# -- file format -----------------------------------------------------------

def save_graph(graph: Graph, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{graph.n} {graph.m}\n")
        fh.writelines(f"{u} {v}\n" for u, v in graph.edges())


def load_graph(path: str | os.PathLike) -> Graph:
    with open(path, encoding="ascii") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise GraphParseError("missing header", 1)
    header = lines[0].split()
    if len(header) != 2 or not all(t.isdigit() for t in header):
        raise GraphParseError(f"malformed header {lines[0]!r}, expected 'n m'", 1)
    n, m = int(header[0]), int(header[1])
    if len(lines) - 1 != m:
        raise GraphParseError(f"header declares {m} edges, file has {len(lines) - 1}", len(lines))
    seen: set[tuple[int, int]] = set()
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 2 or not all(t.isdigit() for t in parts):
            raise GraphParseError(f"malformed edge line {line!r}", lineno)
        u, v = int(parts[0]), int(parts[1])
        if u >= n or v >= n:
            raise GraphParseError(f"vertex id out of range 0..{n - 1}", lineno)
        if u == v:
            raise GraphParseError(f"self-loop at {u}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphParseError(f"duplicate edge {key}", lineno)
        seen.add(key)
        edges.append(key)
    return Graph.from_edges(n, edges)


# -- exposure experiment ---------------------------------------------------

@dataclass
class ExposureReport:
    d: float
    s: int
    trials: int
    ratios: list[float]
    exceed_fraction: float

    @property
    def max_ratio(self) -> float:
        return max(self.ratios, default=0.0)

    @property
    def mean_ratio(self) -> float:
        return sum(self.ratios) / len(self.ratios) if self.ratios else 0.0


def _component_sizes(graph: Graph) -> list[int]:
    comp = [-1] * graph.n
    sizes = []
    for s in range(graph.n):
        if comp[s] >= 0:
            continue
        cid = len(sizes)
        comp[s] = cid
        stack = [s]
        size = 0
        while stack:
            u = stack.pop()
            size += 1
            for w in graph.adjacency[u]:
                if comp[w] < 0:
                    comp[w] = cid
                    stack.append(w)
        sizes.append(size)
    return [sizes[c] for c in comp]


def exposure_neighborhood_experiment(
    graph: Graph, d: float, s: int, trials: int, rng_seed: int = 0
) -> ExposureReport:
    """Adaptively expose ``s`` vertices in BFS order and measure incident edges.

    Each trial starts at a uniformly random vertex whose component has at
    least ``s`` vertices and counts the edges with an endpoint in the
    exposed set, normalized by ``d * s``.
    """
    if s < 1 or trials < 1:
        raise ParameterError("need s >= 1 and trials >= 1")
    if d <= 0:
        raise ParameterError("need d > 0 to normalize")
    sizes = _component_sizes(graph)
    starts = [v for v in range(graph.n) if sizes[v] >= s]
    if not starts:
        raise ParameterError(f"no connected component with at least {s} vertices")
    rng = np.random.default_rng(rng_seed)
    ratios = []
    for _ in range(trials):
        v0 = starts[int(rng.integers(len(starts)))]
        exposed = {v0}
        queue = deque([v0])
        order = []
        while queue and len(order) < s:
            u = queue.popleft()
            order.append(u)
            for w in graph.adjacency[u]:
                if w not in exposed:
                    exposed.add(w)
                    queue.append(w)
        members = set(order)
        count = sum(
            1 for u in members for w in graph.adjacency[u] if w not in members or u < w
        )
        ratios.append(count / (d * len(members)))
    exceed = sum(r > 6 for r in ratios) / trials
    return ExposureReport(d=d, s=s, trials=trials, ratios=ratios, exceed_fraction=exceed)


def mean_degree(graph: Graph) -> float:
    return 2 * graph.m / graph.n if graph.n else 0.0


def log2n(n: int) -> float:
    return math.log2(max(n, 2))
