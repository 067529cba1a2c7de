"""Exact and Monte Carlo checks of the probabilistic claims behind the LCA.

Dominance questions between binomials are decided exactly with integer
numerators over a common denominator; sampling is only used for quantities
without a feasible closed form (vicinity moments, tightness, level balance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .errors import BudgetExceeded, ParameterError
from .graph import Graph, GeneratorSpec, GraphOracle, complete_tree, generate, tree_depths
from .ordering import default_parameters, sample_ranking
from .vicinity import DEFAULT_BUDGET, relevant_vicinity, trial_seed

PATH_COUNT_BUDGET = 10**8
SLOPE_THRESHOLD = 0.15


# -- exact distributions ---------------------------------------------------

@dataclass(frozen=True)
class DistSpec:
    """``offset + B(trials, prob)`` with an exact rational ``prob``."""

    kind: str
    trials: int
    prob: Fraction
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "prob", Fraction(self.prob))
        if self.kind not in ("binomial", "shifted-binomial"):
            raise ParameterError(f"unknown distribution kind {self.kind!r}")
        if self.trials < 0:
            raise ParameterError("trials must be >= 0")
        if not 0 <= self.prob <= 1:
            raise ParameterError(f"probability {self.prob} outside [0, 1]")
        if self.kind == "binomial" and self.offset != 0:
            raise ParameterError("plain binomial has offset 0; use shifted-binomial")

    @property
    def support(self) -> range:
        return range(self.offset, self.offset + self.trials + 1)

    def pmf_numerators(self) -> tuple[list[int], int]:
        """Integer numerators of the pmf over ``support`` and their common denominator."""
        a, b = self.prob.numerator, self.prob.denominator
        n = self.trials
        nums = [math.comb(n, i) * a**i * (b - a) ** (n - i) for i in range(n + 1)]
        return nums, b**n

    def pmf(self) -> dict[int, Fraction]:
        nums, den = self.pmf_numerators()
        return {self.offset + i: Fraction(x, den) for i, x in enumerate(nums)}


def binomial(trials: int, prob) -> DistSpec:
    return DistSpec("binomial", trials, Fraction(prob))


def shifted_binomial(offset: int, trials: int, prob) -> DistSpec:
    return DistSpec("shifted-binomial", trials, Fraction(prob), offset)


def binomial_cdf(spec: DistSpec, x) -> Fraction:
    """Exact ``Pr[X <= x]``."""
    k = math.floor(x) - spec.offset
    if k < 0:
        return Fraction(0)
    if k >= spec.trials:
        return Fraction(1)
    nums, den = spec.pmf_numerators()
    return Fraction(sum(nums[: k + 1]), den)


def _tail_numerators(spec: DistSpec) -> tuple[list[int], int]:
    # tails[i] = numerator of Pr[X > offset + i - 1], i = 0..trials+1
    nums, den = spec.pmf_numerators()
    tails = [0] * (len(nums) + 1)
    acc = 0
    for i in range(len(nums) - 1, -1, -1):
        acc += nums[i]
        tails[i] = acc
    return tails, den


def _tail_at(tails: list[int], den: int, offset: int, t: int) -> tuple[int, int]:
    i = t - offset + 1
    if i <= 0:
        return den, den
    if i >= len(tails):
        return 0, den
    return tails[i], den


def dominance_violations(x: DistSpec, y: DistSpec) -> list[tuple[int, Fraction, Fraction]]:
    """Points ``t`` where ``Pr[X > t] > Pr[Y > t]``, with both tails."""
    tx, dx = _tail_numerators(x)
    ty, dy = _tail_numerators(y)
    lo = min(x.offset, y.offset)
    hi = max(x.offset + x.trials, y.offset + y.trials)
    bad = []
    for t in range(lo, hi + 1):
        nx, _ = _tail_at(tx, dx, x.offset, t)
        ny, _ = _tail_at(ty, dy, y.offset, t)
        if nx * dy > ny * dx:
            bad.append((t, Fraction(nx, dx), Fraction(ny, dy)))
    return bad


def check_stochastic_dominance(x: DistSpec, y: DistSpec) -> bool:
    """True iff ``X <=st Y``, decided exactly on the union of supports."""
    return not dominance_violations(x, y)


# -- dominance lemmas ------------------------------------------------------

@dataclass
class LemmaReport:
    n: int
    d: int
    alphas: list[int]
    failures: list[tuple] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "n": self.n, "d": self.d, "alphas": self.alphas, "passed": self.passed,
            "failures": [[str(x) for x in f] for f in self.failures], "notes": self.notes,
        }


def verify_lemma_lrst(n: int, d: int) -> LemmaReport:
    """Check ``B(a, d/a) <=st 2d + B(n^2, 2d/n^2)`` for every ``a`` in ``[d, n]``.

    Also checks the three intermediate steps for ``2d < a <= n``:

    * ``B(1, d/a) <=st B(ceil(n^2/a), 2d/n^2)`` through ``Pr[Y=0] <= Pr[X=0]``,
      and by full exact comparison;
    * ``B(a, d/a) <=st 1 + B(a-1, d/a)``;
    * ``(a-1) * ceil(n^2/a) <= n^2``, and the resulting dominance of
      ``B((a-1)ceil(n^2/a), 2d/n^2)`` by ``B(n^2, 2d/n^2)``.

    Failures are listed as ``(claim, a, t)`` tuples (``t`` is None for
    inequalities without a tail point).
    """
    if not 1 <= d <= n:
        raise ParameterError(f"need 1 <= d <= n, got n={n}, d={d}")
    nn = n * n
    q = Fraction(2 * d, nn)
    report = LemmaReport(n=n, d=d, alphas=list(range(d, n + 1)))
    if q > 1:
        # Only n = 1: every a <= n <= 2d so X never exceeds the offset of Z.
        report.notes.append(f"2d/n^2 = {q} > 1; capped at 1")
        q = Fraction(1)
    z = shifted_binomial(2 * d, nn, q)
    for a in report.alphas:
        x = binomial(a, Fraction(d, a))
        for t, _, _ in dominance_violations(x, z):
            report.failures.append(("main", a, t))
        if not 2 * d < a:
            continue
        per = -(-nn // a)
        bern = binomial(1, Fraction(d, a))
        y1 = binomial(per, q)
        if (1 - q) ** per > 1 - Fraction(d, a):
            report.failures.append(("zero-mass", a, None))
        for t, _, _ in dominance_violations(bern, y1):
            report.failures.append(("bernoulli", a, t))
        for t, _, _ in dominance_violations(x, shifted_binomial(1, a - 1, Fraction(d, a))):
            report.failures.append(("split", a, t))
        if (a - 1) * per > nn:
            report.failures.append(("ceiling", a, None))
        for t, _, _ in dominance_violations(binomial((a - 1) * per, q), binomial(nn, q)):
            report.failures.append(("merge", a, t))
    return report


Pmf = Mapping[int, Fraction]


def _tail_dominated(x: Pmf, y: Pmf) -> list[int]:
    points = sorted(set(x) | set(y))
    bad = []
    for t in points:
        px = sum((p for v, p in x.items() if v > t), Fraction(0))
        py = sum((p for v, p in y.items() if v > t), Fraction(0))
        if px > py:
            bad.append(t)
    return bad


def _convolve(a: Pmf, b: Pmf) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for x, p in a.items():
        for y, q in b.items():
            out[x + y] = out.get(x + y, Fraction(0)) + p * q
    return out


@dataclass
class SumDominanceReport:
    preconditions_hold: bool
    sum_dominated: bool
    precondition_failures: list[tuple]
    sum_failures: list[int]
    sum_x: dict[int, Fraction]
    sum_y: dict[int, Fraction]

    @property
    def passed(self) -> bool:
        return self.preconditions_hold and self.sum_dominated

    def to_json(self) -> dict:
        return {
            "preconditions_hold": self.preconditions_hold,
            "sum_dominated": self.sum_dominated,
            "precondition_failures": [[str(x) for x in f] for f in self.precondition_failures],
            "sum_failures": self.sum_failures,
            "sum_x": {str(k): str(v) for k, v in sorted(self.sum_x.items())},
            "sum_y": {str(k): str(v) for k, v in sorted(self.sum_y.items())},
        }


def verify_sum_dominance(
    joint: Mapping[tuple[int, ...], Fraction], ys: Sequence[Pmf]
) -> SumDominanceReport:
    """Exhaustively check that conditional dominance carries over to sums.

    ``joint`` is the full joint pmf of the dependent sequence ``X_1..X_N``
    keyed by outcome tuples; ``ys`` are the pmfs of the independent
    ``Y_1..Y_N``. Preconditions: for each ``i`` and every prefix with
    positive mass, ``X_i`` given that prefix is dominated by ``Y_i``. The
    conclusion compared is ``sum X <=st sum Y``.
    """
    if not joint:
        raise ParameterError("joint distribution is empty")
    width = len(ys)
    if any(len(k) != width for k in joint):
        raise ParameterError("outcome tuples must match the number of Y variables")
    if sum(joint.values()) != 1 or any(sum(y.values()) != 1 for y in ys):
        raise ParameterError("distributions must sum to 1")
    pre_fail = []
    for i in range(width):
        prefixes: dict[tuple[int, ...], dict[int, Fraction]] = {}
        for outcome, p in joint.items():
            if p:
                cond = prefixes.setdefault(outcome[:i], {})
                cond[outcome[i]] = cond.get(outcome[i], Fraction(0)) + p
        for prefix, cond in sorted(prefixes.items()):
            mass = sum(cond.values())
            normalized = {v: p / mass for v, p in cond.items()}
            for t in _tail_dominated(normalized, ys[i]):
                pre_fail.append((i, prefix, t))
    sum_x: dict[int, Fraction] = {}
    for outcome, p in joint.items():
        s = sum(outcome)
        sum_x[s] = sum_x.get(s, Fraction(0)) + p
    sum_y: dict[int, Fraction] = {0: Fraction(1)}
    for y in ys:
        sum_y = _convolve(sum_y, y)
    bad = _tail_dominated(sum_x, sum_y)
    return SumDominanceReport(not pre_fail, not bad, pre_fail, bad, sum_x, sum_y)


def bernoulli(p) -> dict[int, Fraction]:
    p = Fraction(p)
    return {0: 1 - p, 1: p}


def chain_joint(first: Pmf, *conditionals) -> dict[tuple[int, ...], Fraction]:
    """Joint pmf of a sequence whose i-th term depends on the previous outcomes.

    Each conditional is a function ``prefix -> pmf``.
    """
    joint = {(v,): p for v, p in first.items()}
    for cond in conditionals:
        nxt = {}
        for prefix, p in joint.items():
            for v, q in cond(prefix).items():
                nxt[prefix + (v,)] = p * q
        joint = nxt
    return joint


def sum_dominance_cases() -> dict[str, tuple[SumDominanceReport, bool]]:
    """Built-in cases as ``name -> (report, expected_pass)``."""
    half = bernoulli(Fraction(1, 2))
    dep = chain_joint(bernoulli(Fraction(1, 4)),
                      lambda pre: bernoulli(Fraction(1, 4) + Fraction(pre[0], 8)))
    indep = {(a, b): p * q for (a, p), (b, q) in product(half.items(), half.items())}
    return {
        "independent-equal": (verify_sum_dominance(indep, [half, half]), True),
        "dependent-dominated": (verify_sum_dominance(dep, [half, half]), True),
        "negative-control": (verify_sum_dominance(dep, [half, bernoulli(Fraction(1, 8))]), False),
    }


# -- simple paths ----------------------------------------------------------

def count_simple_paths(graph: Graph, v: int, t: int, *, budget: int = PATH_COUNT_BUDGET) -> int:
    """Number of simple paths with ``t`` edges starting at ``v``."""
    if not 0 <= v < graph.n:
        raise ParameterError(f"vertex {v} out of range")
    if t < 0:
        raise ParameterError("t must be >= 0")
    if t == 0:
        return 1
    adj = graph.adjacency
    on_path = {v}
    total = 0
    # Iterative DFS over (vertex, neighbor iterator) frames.
    stack = [iter(adj[v])]
    path = [v]
    while stack:
        depth = len(path)  # edges used so far + 1
        if depth == t:
            u = path[-1]
            total += sum(1 for w in adj[u] if w not in on_path)
            if total > budget:
                raise BudgetExceeded(v, budget)
            stack.pop()
            on_path.discard(path.pop())
            continue
        w = next(stack[-1], None)
        if w is None:
            stack.pop()
            on_path.discard(path.pop())
            continue
        if w in on_path:
            continue
        on_path.add(w)
        path.append(w)
        stack.append(iter(adj[w]))
    return total


def simple_path_experiment(n: int, d: float, t: int, trials: int, rng_seed: int = 0) -> dict:
    """Mean simple-path count from a random vertex of ``G(n, d/(n-1))``."""
    rng = np.random.default_rng(rng_seed)
    counts = []
    for i in range(trials):
        g = generate(GeneratorSpec("gnp", n=n, d=d, rng_seed=int(rng.integers(2**63))))
        counts.append(count_simple_paths(g, int(rng.integers(n)), t))
    arr = np.asarray(counts, dtype=float)
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    mean = float(arr.mean())
    bound = float(d) ** t
    return {"mean": mean, "se": se, "bound": bound, "within": mean <= bound + 5 * se}


# -- reports ---------------------------------------------------------------

@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    records: list[dict]
    aggregates: dict
    verdicts: dict[str, bool]

    def __post_init__(self):
        self.verdicts = {k: bool(v) for k, v in self.verdicts.items()}

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self, *, records: bool = True) -> dict:
        out = {"name": self.name, "parameters": self.parameters,
               "aggregates": self.aggregates, "verdicts": self.verdicts, "passed": self.passed}
        if records:
            out["records"] = self.records
        return out


def loglog_slope(ns: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ``log(value)`` against ``log(n)``.

    0 when all values are 0 or fewer than two distinct ``n`` are given.
    """
    vals = np.asarray(values, dtype=float)
    if np.all(vals == 0) or len(set(ns)) < 2:
        return 0.0
    if np.any(vals <= 0):
        raise ParameterError("log-log fit needs all-positive or all-zero values")
    slope, _ = np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(vals), 1)
    return float(slope)


def family_graph(family: str, n: int, d: float, rng_seed: int) -> Graph:
    """Graph of ``family`` with about ``n`` vertices; bipartite uses ``n/5`` producers."""
    if family == "bipartite":
        m = max(1, n // 5)
        return generate(GeneratorSpec("bipartite", n=n - m, m=m, d=d, rng_seed=rng_seed))
    return generate(GeneratorSpec(family, n=n, d=d, rng_seed=rng_seed))


def sample_vicinities(
    family: str, n: int, d: float, trials: int, *,
    rng_seed: int = 0, graphs: int = 4, L: int | None = None, k: int | None = None,
    budget: int = DEFAULT_BUDGET,
) -> list[dict]:
    """``trials`` explorations of random (hash seed, center) pairs on fresh graphs.

    Trial ``i`` uses graph ``i % graphs`` and the hash seed derived from
    ``(rng_seed, n, i)``, so records do not depend on scheduling.
    """
    dL, dk = default_parameters(n, d if d > 0 else 1)
    L = L or dL
    k = k or dk
    master = np.random.default_rng([rng_seed, n])
    pool = [family_graph(family, n, d, int(s)) for s in master.integers(0, 2**63, size=graphs)]
    centers = master.integers(0, 2**62, size=trials)
    records = []
    for i in range(trials):
        g = pool[i % graphs]
        rf = sample_ranking(g.n, min(L, g.n), min(k, g.n), trial_seed(rng_seed * 2**20 + n, i))
        center = int(centers[i] % g.n)
        oracle = GraphOracle(g)
        try:
            vic = relevant_vicinity(oracle, rf, center, budget=budget)
            rec = {"n": g.n, "d": d, "L": rf.L, "k": rf.k, "center": center, "t_v": vic.t_v,
                   "t_e": vic.t_e, "queries": vic.queries, "budget_exceeded": False}
        except BudgetExceeded:
            rec = {"n": g.n, "d": d, "L": rf.L, "k": rf.k, "center": center, "t_v": None,
                   "t_e": None, "queries": oracle.queries, "budget_exceeded": True}
        records.append(rec)
    return records


def _grid_samples(family, grid, d, trials, rng_seed, graphs, samples) -> dict[int, list[dict]]:
    # ``samples`` lets callers hand in records computed elsewhere (e.g. in parallel).
    samples = samples or {}
    return {n: samples[n] if n in samples else
            sample_vicinities(family, n, d, trials, rng_seed=rng_seed, graphs=graphs)
            for n in grid}


def _max_t_v(records: list[dict]) -> float:
    # A budget overrun counts as larger than anything observed.
    if any(r["budget_exceeded"] for r in records):
        return math.inf
    return max((r["t_v"] for r in records), default=0)


def _grid_aggregates(grid: Sequence[int], by_n: dict[int, list[dict]], tail_c: float,
                     max_sample: int | None = None) -> dict:
    rows = []
    for n in grid:
        ok = [r for r in by_n[n] if not r["budget_exceeded"]]
        t_v = np.array([r["t_v"] for r in ok], dtype=float)
        t_e = np.array([r["t_e"] for r in ok], dtype=float)
        log_n = math.log2(n)
        head_max = _max_t_v(by_n[n][:max_sample])
        rows.append({
            "n": n,
            "inquiries": len(by_n[n]),
            "budget_exceeded": len(by_n[n]) - len(ok),
            "mean_t_v": float(t_v.mean()) if ok else 0.0,
            "max_t_v": int(t_v.max()) if ok else 0,
            "max_sample": min(len(by_n[n]), max_sample or len(by_n[n])),
            "sample_max_t_v": head_max,
            "max_t_v_over_log2n": head_max / log_n,
            "tail_fraction": float((t_v > tail_c * log_n).sum() + len(by_n[n]) - len(ok))
            / max(1, len(by_n[n])),
            "mean_t_e": float(t_e.mean()) if ok else 0.0,
            "mean_t_e_sq": float((t_e**2).mean()) if ok else 0.0,
            "q99_t_v": float(np.quantile(t_v, 0.99)) if ok else 0.0,
        })
    logs = np.log2(np.asarray(grid, dtype=float))
    maxima = np.asarray([r["sample_max_t_v"] for r in rows], dtype=float)
    return {
        "per_n": rows,
        # Least-squares C in max_t_v ~ C * log2 n, through the origin.
        "fitted_max_ratio": float((maxima * logs).sum() / (logs**2).sum()),
        "t_e_slope": loglog_slope(grid, [r["mean_t_e"] for r in rows]),
        "t_e_sq_slope": loglog_slope(grid, [r["mean_t_e_sq"] for r in rows]),
    }


def expected_moment_experiment(
    family: str, n_grid: Sequence[int], d: float, trials: int, *,
    rng_seed: int = 0, graphs: int = 4, slope_threshold: float = SLOPE_THRESHOLD,
    samples: dict[int, list[dict]] | None = None,
) -> ExperimentReport:
    """Mean ``t_e`` and ``t_e^2`` across ``n``; both log-log slopes must stay below threshold."""
    grid = sorted(set(n_grid))
    by_n = _grid_samples(family, grid, d, trials, rng_seed, graphs, samples)
    agg = _grid_aggregates(grid, by_n, 8.0)
    verdicts = {
        "t_e_slope": agg["t_e_slope"] < slope_threshold,
        "t_e_sq_slope": agg["t_e_sq_slope"] < slope_threshold,
    }
    return ExperimentReport(
        "moments",
        {"family": family, "n_grid": grid, "d": d, "trials": trials, "rng_seed": rng_seed,
         "graphs": graphs, "slope_threshold": slope_threshold},
        [r for n in grid for r in by_n[n]], agg, verdicts,
    )


def vicinity_scaling_experiment(
    family: str, n_grid: Sequence[int], d: float, trials: int, *,
    rng_seed: int = 0, graphs: int = 4, tail_c: float = 8.0, tail_limit: float = 1e-3,
    ratio_limit: float = 8.0, slope_threshold: float = SLOPE_THRESHOLD,
    max_sample: int | None = None, samples: dict[int, list[dict]] | None = None,
) -> ExperimentReport:
    """Size of relevant vicinities against ``log2 n``, plus the moment slopes.

    Verdicts: at every ``n`` the share of inquiries with ``t_v > tail_c*log2 n``
    is below ``tail_limit`` and ``max t_v / log2 n <= ratio_limit``; the
    ``t_e`` and ``t_e^2`` log-log slopes are below ``slope_threshold``.
    The maximum is taken over the first ``max_sample`` inquiries per ``n``
    (all of them by default), since a sample maximum depends on sample size.
    """
    grid = sorted(set(n_grid))
    by_n = _grid_samples(family, grid, d, trials, rng_seed, graphs, samples)
    agg = _grid_aggregates(grid, by_n, tail_c, max_sample)
    rows = agg["per_n"]
    verdicts = {
        "tail_fraction": all(r["tail_fraction"] < tail_limit for r in rows),
        "max_ratio_bounded": all(r["max_t_v_over_log2n"] <= ratio_limit for r in rows),
        "t_e_slope": agg["t_e_slope"] < slope_threshold,
        "t_e_sq_slope": agg["t_e_sq_slope"] < slope_threshold,
    }
    return ExperimentReport(
        "scaling",
        {"family": family, "n_grid": grid, "d": d, "trials": trials, "rng_seed": rng_seed,
         "graphs": graphs, "tail_c": tail_c, "tail_limit": tail_limit,
         "ratio_limit": ratio_limit, "slope_threshold": slope_threshold,
         "max_sample": max_sample},
        [r for n in grid for r in by_n[n]], agg, verdicts,
    )


# -- tightness -------------------------------------------------------------

class PermutationRanking:
    """Ranking from a full permutation: ``level(v) = perm[v] + 1`` with ``L = n``."""

    def __init__(self, perm: Sequence[int]):
        self.n = len(perm)
        self.L = self.n
        self._table = [int(x) + 1 for x in perm]

    def level(self, v: int) -> int:
        return self._table[v]


def tree_vicinity_mean(d: int, depth: int) -> Fraction:
    """Exact expected relevant-vicinity size of the root: sum of ``d^l/(l+1)!``."""
    return sum((Fraction(d**ell, math.factorial(ell + 1)) for ell in range(depth + 1)), Fraction(0))


def tightness_experiment(d: int, depth: int, trials: int, *, rng_seed: int = 0,
                         tolerance: float = 0.10) -> ExperimentReport:
    """Relevant vicinity of the root of the complete ``d``-ary tree under uniform orderings.

    Records the per-depth occupancy ``X_l`` of the vicinity. Verdicts follow
    the lower-bound argument: mean size at least ``2^(d/2)`` when
    ``depth >= d/2``, and each ``X_l`` for ``l <= min(depth, d/2)`` within
    ``tolerance`` of ``d^l/l!``. The exact per-depth value ``d^l/(l+1)!``
    and the exact mean are reported alongside.
    """
    if d < 1 or depth < 0 or trials < 1:
        raise ParameterError("need d >= 1, depth >= 0, trials >= 1")
    tree = complete_tree(d, depth)
    depth_of = tree_depths(d, depth)
    oracle = GraphOracle(tree)
    rng = np.random.default_rng(rng_seed)
    sizes = np.zeros(trials, dtype=np.int64)
    occupancy = np.zeros((trials, depth + 1), dtype=np.int64)
    for i in range(trials):
        rf = PermutationRanking(rng.permutation(tree.n))
        oracle.reset()
        vic = relevant_vicinity(oracle, rf, 0)
        sizes[i] = vic.t_v
        for u in vic.members:
            occupancy[i, depth_of[u]] += 1
    per_level = occupancy.mean(axis=0)
    claimed = [d**ell / math.factorial(ell) for ell in range(depth + 1)]
    exact = [d**ell / math.factorial(ell + 1) for ell in range(depth + 1)]
    exact_mean = float(tree_vicinity_mean(d, depth))
    mean = float(sizes.mean())
    se = float(sizes.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    verdicts: dict[str, bool] = {}
    if depth >= d / 2:
        verdicts["mean_at_least_2^(d/2)"] = mean >= 2 ** (d / 2)
    for ell in range(1, min(depth, d // 2) + 1):
        verdicts[f"level_{ell}_within_tolerance"] = (
            abs(per_level[ell] - claimed[ell]) <= tolerance * claimed[ell])
    aggregates = {
        "mean": mean, "se": se, "max": int(sizes.max()), "exact_mean": exact_mean,
        "lower_bound": 2 ** (d / 2), "per_level_mean": per_level.tolist(),
        "per_level_claimed": claimed, "per_level_exact": exact,
    }
    return ExperimentReport(
        "tightness",
        {"d": d, "depth": depth, "trials": trials, "rng_seed": rng_seed, "tolerance": tolerance},
        [], aggregates, verdicts,
    )


# -- level balance ---------------------------------------------------------

class RecordingRanking:
    """Wraps a ranking and records distinct ids in first-query order."""

    def __init__(self, rf):
        self.rf = rf
        self.n = rf.n
        self.L = rf.L
        self.order: list[int] = []
        self._seen: dict[int, int] = {}

    def level(self, v: int) -> int:
        lv = self._seen.get(v)
        if lv is None:
            lv = self._seen[v] = self.rf.level(v)
            self.order.append(v)
        return lv


def level_balance_experiment(
    n: int, d: float, L: int, seeds: int, *, rng_seed: int = 0, c: float = 1.0,
    k: int | None = None, ratio: float = 2.0, limit: float = 1e-3,
) -> ExperimentReport:
    """Level loads seen by an LCA session that has queried ``m = ceil(c L log2 n)`` ids.

    Per hash seed, random inquiries are explored on one ``G(n, d)`` graph with
    a shared level cache until ``m`` distinct ids have had their level
    evaluated. The case exceeds when some level holds more than ``ratio * m/L``
    of the first ``m`` queried ids. The exact single-level binomial tail and
    its union bound over levels are reported for comparison.
    """
    _, dk = default_parameters(n, d)
    k = k or dk
    m = math.ceil(c * L * math.log2(n))
    if m > n:
        raise ParameterError(f"m = {m} exceeds n = {n}")
    g = generate(GeneratorSpec("gnp", n=n, d=d, rng_seed=rng_seed))
    oracle = GraphOracle(g)
    rng = np.random.default_rng([rng_seed, 1])
    records = []
    exceed = 0
    for s in range(seeds):
        rec_rf = RecordingRanking(sample_ranking(n, L, k, trial_seed(rng_seed, s)))
        inquiries = 0
        while len(rec_rf.order) < m:
            oracle.reset()
            relevant_vicinity(oracle, rec_rf, int(rng.integers(n)))
            inquiries += 1
        counts = [0] * L
        for v in rec_rf.order[:m]:
            counts[rec_rf.rf.level(v) - 1] += 1
        max_ratio = max(counts) * L / m
        hit = max(counts) > ratio * m / L
        exceed += hit
        records.append({"seed": s, "inquiries": inquiries, "m": m, "max_count": max(counts),
                        "max_ratio": max_ratio, "exceeds": hit})
    level_tail = 1 - binomial_cdf(binomial(m, Fraction(1, L)), math.floor(ratio * m / L))
    frac = exceed / seeds
    aggregates = {
        "m": m, "k": k, "exceed_count": exceed, "exceed_fraction": frac,
        "max_ratio": max(r["max_ratio"] for r in records),
        "single_level_tail": float(level_tail), "union_bound": float(min(1, L * level_tail)),
    }
    return ExperimentReport(
        "level-balance",
        {"n": n, "d": d, "L": L, "seeds": seeds, "rng_seed": rng_seed, "c": c,
         "ratio": ratio, "limit": limit},
        records, aggregates, {"exceed_fraction_below_limit": frac < limit},
    )


# -- small exact experiments ----------------------------------------------

def dominance_experiment(n: int, d: int) -> ExperimentReport:
    lemma = verify_lemma_lrst(n, d)
    cases = sum_dominance_cases()
    verdicts = {"lemma": lemma.passed}
    for name, (rep, expected) in cases.items():
        verdicts[f"sum:{name}"] = rep.passed == expected
    return ExperimentReport(
        "dominance", {"n": n, "d": d},
        [lemma.to_json()] + [{"case": k, **v[0].to_json()} for k, v in cases.items()],
        {"alphas_checked": len(lemma.alphas), "lemma_failures": len(lemma.failures)},
        verdicts,
    )


def legal_paths_experiment(L: int, t: int) -> ExperimentReport:
    from .ordering import (count_legal_sequences, enumerate_legal_sequences, legal_path_bound,
                           legal_path_probability, probability_within_bound)

    prob = legal_path_probability(L, t)
    count = count_legal_sequences(L, t)
    verdicts = {"within_bound": probability_within_bound(L, t)}
    aggregates = {"count": count, "probability": str(prob), "probability_float": float(prob),
                  "bound": float(legal_path_bound(L, t))}
    if L**t <= 10**6:
        brute = enumerate_legal_sequences(L, t)
        aggregates["enumerated"] = brute
        verdicts["count_matches_enumeration"] = brute == count
    return ExperimentReport("legal-paths", {"L": L, "t": t}, [], aggregates, verdicts)


def exposure_experiment(n: int, d: float, s: int, trials: int, *, model: str = "gnp",
                        rng_seed: int = 0) -> ExperimentReport:
    from .graph import exposure_neighborhood_experiment

    g = family_graph(model, n, d, rng_seed)
    rep = exposure_neighborhood_experiment(g, d, s, trials, rng_seed=rng_seed)
    return ExperimentReport(
        "exposure", {"model": model, "n": n, "d": d, "s": s, "trials": trials, "rng_seed": rng_seed},
        [{"ratio": r} for r in rep.ratios],
        {"mean_ratio": rep.mean_ratio, "max_ratio": rep.max_ratio,
         "exceed_fraction": rep.exceed_fraction},
        {"no_exceedance": rep.exceed_fraction == 0},
    )

