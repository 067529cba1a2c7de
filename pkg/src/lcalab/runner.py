"""Batch inquiry answering and the LCA-versus-global consistency check."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

from .engine import (InquiryResult, OnlineAlgorithm, get_algorithm, global_online_run,
                     lca_answer, structure_for, verify_assignment)
from .errors import BudgetExceeded
from .graph import Graph, GraphOracle
from .vicinity import DEFAULT_BUDGET, Ranking

_worker: dict = {}


def _init_worker(graph: Graph, rf: Ranking, problem: str, method: int, budget: int) -> None:
    alg = get_algorithm(problem)
    _worker.update(oracle=GraphOracle(structure_for(graph, alg)), rf=rf, alg=alg,
                   method=method, budget=budget)


def _answer_chunk(chunk: Sequence[int]) -> list:
    w = _worker
    return [_answer_one(w["oracle"], w["rf"], w["alg"], x, w["method"], w["budget"]) for x in chunk]


def _answer_one(oracle: GraphOracle, rf: Ranking, alg: OnlineAlgorithm, x: int,
                method: int, budget: int):
    try:
        return lca_answer(oracle, rf, alg, x, method=method, budget=budget)
    except BudgetExceeded as exc:
        return exc


def answer_inquiries(
    graph: Graph, problem: str, rf: Ranking, inquiries: Sequence[int], *,
    method: int = 1, budget: int = DEFAULT_BUDGET, jobs: int = 1,
) -> list:
    """Answer each inquiry independently; results come back in input order.

    Each entry is an :class:`InquiryResult` or the :class:`BudgetExceeded`
    raised for that inquiry. With ``jobs > 1`` contiguous chunks go to worker
    processes, which changes nothing but wall-clock time.
    """
    alg = get_algorithm(problem)
    inquiries = list(inquiries)
    if jobs <= 1 or len(inquiries) < 2 * jobs:
        oracle = GraphOracle(structure_for(graph, alg))
        return [_answer_one(oracle, rf, alg, x, method, budget) for x in inquiries]
    size = math.ceil(len(inquiries) / (4 * jobs))
    chunks = [inquiries[i:i + size] for i in range(0, len(inquiries), size)]
    out: list = []
    with ProcessPoolExecutor(jobs, initializer=_init_worker,
                             initargs=(graph, rf, problem, method, budget)) as pool:
        for part in pool.map(_answer_chunk, chunks):
            out.extend(part)
    return out


@dataclass
class ConsistencyReport:
    problem: str
    method: int
    inquiries: int
    mismatches: list[tuple[int, Hashable, Hashable]] = field(default_factory=list)
    violations: list[tuple] = field(default_factory=list)
    budget_failures: list[int] = field(default_factory=list)
    results: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return not (self.mismatches or self.violations or self.budget_failures)

    def summary(self) -> dict:
        return {
            "problem": self.problem, "method": self.method, "inquiries": self.inquiries,
            "mismatches": len(self.mismatches), "violations": len(self.violations),
            "budget_exceeded": len(self.budget_failures), "ok": self.ok,
        }


def consistency_check(
    graph: Graph, problem: str, rf: Ranking | None, *,
    method: int = 1, budget: int = DEFAULT_BUDGET, jobs: int = 1,
    tamper: Callable[[dict], dict] | None = None,
) -> ConsistencyReport:
    """Answer every inquiry through the LCA and compare with the global greedy run.

    ``tamper`` may rewrite the LCA assignment before comparison; it exists
    so negative controls can inject a corrupted answer. ``rf`` may be None
    only when there is nothing to rank (no vertices, or no edges for matching).
    """
    alg = get_algorithm(problem)
    size = structure_for(graph, alg).n
    report = ConsistencyReport(problem, method, size)
    if size == 0:
        return report
    results = answer_inquiries(graph, problem, rf, range(size), method=method,
                               budget=budget, jobs=jobs)
    report.results = results
    assignment = {}
    for x, res in enumerate(results):
        if isinstance(res, BudgetExceeded):
            report.budget_failures.append(x)
        else:
            assignment[x] = res.output
    if tamper is not None:
        assignment = tamper(dict(assignment))
    reference = global_online_run(graph, rf, alg)
    skipped = set(report.budget_failures)
    # Unanswered inquiries are reported as budget failures, not as mismatches.
    report.mismatches = [(x, assignment.get(x), reference[x]) for x in range(size)
                         if x not in skipped and assignment.get(x) != reference[x]]
    if not report.budget_failures:
        report.violations = verify_assignment(graph, problem, assignment)
    return report


def assignment_lines(results: Sequence) -> list[str]:
    """``id value`` text lines for answered inquiries, in id order."""
    answered = sorted((r.vertex, r.output) for r in results if isinstance(r, InquiryResult))
    return [f"{x} {value}" for x, value in answered]
