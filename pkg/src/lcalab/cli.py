"""Command-line entry point: ``lcalab {gen,query,verify,stats,experiment}``.

Exit codes: 0 ok, 2 bad parameters, 3 I/O or parse error, 4 exploration
budget exceeded, 5 LCA disagrees with the global run or the assignment is
infeasible, 6 an experiment verdict failed.

stdout carries a JSON header line (effective configuration plus a
timestamp) followed by a deterministic body; human summaries go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from typing import Callable

from . import __version__
from .analysis import (ExperimentReport, dominance_experiment, expected_moment_experiment,
                       exposure_experiment, legal_paths_experiment, level_balance_experiment,
                       sample_vicinities, tightness_experiment, vicinity_scaling_experiment)
from .engine import get_algorithm, structure_degree, structure_for
from .errors import BudgetExceeded, GenerationError, GraphParseError, LcaLabError, ParameterError
from .graph import GeneratorSpec, Graph, generate, load_graph, save_graph
from .ordering import RankingFunction, default_parameters, sample_ranking
from .runner import answer_inquiries, assignment_lines, consistency_check
from .vicinity import budget_from_env, vicinity_stats

EXIT_OK = 0
EXIT_PARAM = 2
EXIT_IO = 3
EXIT_BUDGET = 4
EXIT_MISMATCH = 5
EXIT_VERDICT = 6

# Negative-control hook: when set, ``verify`` passes the LCA assignment through it.
assignment_hook: Callable[[dict], dict] | None = None

MAX_DIFF_LINES = 1000


class Output:
    """Header line plus JSON-lines body, to stdout or a file."""

    def __init__(self, path: str | None):
        self.path = path
        self._fh = open(path, "w") if path else sys.stdout

    def header(self, command: str, config: dict) -> None:
        self.line({"lcalab": __version__, "command": command, "config": config,
                   "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds")})

    def line(self, obj) -> None:
        self._fh.write(json.dumps(obj, sort_keys=True) + "\n")

    def close(self) -> None:
        if self.path:
            self._fh.close()
        else:
            self._fh.flush()


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- argument parsing ------------------------------------------------------

def _add_graph_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("graph (file or generator)")
    g.add_argument("--graph", help="graph file ('n m' header then 'u v' lines)")
    g.add_argument("--model", choices=["regular", "gnp", "bipartite", "tree", "path"])
    g.add_argument("--n", type=int, default=0, help="vertices (consumers for bipartite)")
    g.add_argument("--d", type=float, default=None, help="degree parameter")
    g.add_argument("--m", type=int, default=None, help="producers (bipartite)")
    g.add_argument("--depth", type=int, default=None, help="tree depth")
    g.add_argument("--rng-seed", type=int, default=0, help="generator/experiment RNG seed")


def _add_ranking_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("ranking")
    g.add_argument("--seed", default="0", help="hash seed in hex (default 0)")
    g.add_argument("--L", type=int, default=None, help="number of levels")
    g.add_argument("--k", type=int, default=None, help="independence / polynomial size")
    g.add_argument("--ranking", help="load the ranking from a JSON file")
    g.add_argument("--save-ranking", help="write the effective ranking as JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcalab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lcalab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a graph")
    _add_graph_args(p)
    p.add_argument("--out", help="write the graph here (default: graph text on stdout)")

    for name, help_ in (("query", "answer inquiries"), ("verify", "check LCA against the global run")):
        p = sub.add_parser(name, help=help_)
        _add_graph_args(p)
        _add_ranking_args(p)
        p.add_argument("--problem", choices=["mis", "matching", "coloring"], required=True)
        p.add_argument("--method", type=int, choices=[1, 2], default=1)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--out")
        p.add_argument("--timing", action="store_true", help="report wall-clock time_ns")
        if name == "query":
            p.add_argument("--vertex", type=int, action="append", default=[],
                           help="inquiry id (an edge id for matching); repeatable")
            p.add_argument("--edge", type=int, nargs=2, action="append", default=[],
                           metavar=("U", "V"), help="edge inquiry by endpoints; repeatable")
            p.add_argument("--all", action="store_true", help="answer every vertex/edge")
        else:
            p.add_argument("--assignment-out", help="save the LCA assignment as 'id value' lines")

    p = sub.add_parser("stats", help="relevant-vicinity statistics")
    _add_graph_args(p)
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--sample-size", type=int, default=100)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--out")

    p = sub.add_parser("experiment", help="run an analysis experiment")
    p.add_argument("name", choices=["scaling", "moments", "tightness", "dominance",
                                    "legal-paths", "level-balance", "exposure"])
    p.add_argument("--family", default="gnp",
                   choices=["regular", "gnp", "bipartite", "path"])
    p.add_argument("--model", default="gnp", choices=["regular", "gnp", "bipartite"])
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n-grid", default="1024,4096,16384,65536",
                   help="comma-separated sizes for scaling/moments")
    p.add_argument("--d", type=float, default=None)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--graphs", type=int, default=4)
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--seeds", type=int, default=1000)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--max-sample", type=int, default=None)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--records", action="store_true", help="include per-trial records")
    p.add_argument("--out")
    return parser


# -- shared helpers --------------------------------------------------------

def _graph_from_args(args) -> tuple[Graph, dict]:
    if args.graph and args.model:
        raise ParameterError("give either --graph or --model, not both")
    if args.graph:
        return load_graph(args.graph), {"graph": args.graph}
    if not args.model:
        raise ParameterError("need --graph or --model")
    spec = GeneratorSpec(args.model, n=args.n, d=args.d if args.d is not None else 0,
                         m=args.m, depth=args.depth, rng_seed=args.rng_seed)
    return generate(spec), {"model": args.model, "n": args.n, "d": args.d, "m": args.m,
                            "depth": args.depth, "rng_seed": args.rng_seed}


def _ranking_from_args(args, size: int, structure) -> RankingFunction | None:
    if args.ranking:
        with open(args.ranking) as fh:
            rf = RankingFunction.from_json(fh.read())
        if rf.n != size:
            raise ParameterError(f"ranking covers {rf.n} ids but the inquiry domain has {size}")
    elif size == 0:
        return None
    else:
        d = args.d if args.d is not None else structure_degree(structure)
        L_def, k_def = default_parameters(size, d)
        rf = sample_ranking(size, args.L or L_def, args.k or k_def, args.seed)
    if args.save_ranking:
        with open(args.save_ranking, "w") as fh:
            fh.write(rf.to_json() + "\n")
    return rf.precompute()


def _ranking_config(rf: RankingFunction | None) -> dict:
    if rf is None:
        return {"L": None, "k": None, "seed": None, "p": None}
    return {"L": rf.L, "k": rf.k, "seed": "0x" + rf.seed_hex, "p": rf.p}


def _check_jobs(jobs: int) -> None:
    if jobs < 1:
        raise ParameterError("--jobs must be >= 1")


# -- subcommands -----------------------------------------------------------

def cmd_gen(args) -> int:
    graph, config = _graph_from_args(args)
    info = {"n": graph.n, "m": graph.m, "max_degree": graph.max_degree()}
    if args.out:
        save_graph(graph, args.out)
        out = Output(None)
        out.header("gen", {**config, "out": args.out})
        out.line(info)
        out.close()
    else:
        sys.stdout.write(f"{graph.n} {graph.m}\n")
        sys.stdout.writelines(f"{u} {v}\n" for u, v in graph.edges())
    _say(f"n={info['n']} m={info['m']} max_degree={info['max_degree']}")
    return EXIT_OK


def _query_inquiries(args, graph: Graph, problem_domain: str, size: int) -> list[int]:
    if args.edge and problem_domain != "edge":
        raise ParameterError("--edge only applies to --problem matching")
    if args.all and (args.vertex or args.edge):
        raise ParameterError("--all excludes --vertex/--edge")
    if not (args.all or args.vertex or args.edge):
        raise ParameterError("need --vertex, --edge or --all")
    if args.all:
        return list(range(size))
    ids = list(args.vertex)
    for u, v in args.edge:
        try:
            ids.append(graph.edge_id(u, v))
        except (KeyError, ValueError, IndexError):
            raise ParameterError(f"({u}, {v}) is not an edge") from None
    for x in ids:
        if not 0 <= x < size:
            raise ParameterError(f"inquiry {x} out of range 0..{size - 1}")
    return ids


def cmd_query(args) -> int:
    _check_jobs(args.jobs)
    alg = get_algorithm(args.problem)
    graph, gconf = _graph_from_args(args)
    structure = structure_for(graph, alg)
    inquiries = _query_inquiries(args, graph, alg.domain, structure.n)
    rf = _ranking_from_args(args, structure.n, structure)
    budget = budget_from_env()
    out = Output(args.out)
    out.header("query", {**gconf, **_ranking_config(rf), "problem": args.problem,
                         "method": args.method, "budget": budget, "jobs": args.jobs,
                         "inquiries": "all" if args.all else inquiries})
    results = answer_inquiries(graph, args.problem, rf, inquiries, method=args.method,
                               budget=budget, jobs=args.jobs) if inquiries else []
    failed = 0
    for x, res in zip(inquiries, results):
        if isinstance(res, BudgetExceeded):
            failed += 1
            out.line({"vertex": x, "error": "budget-exceeded", "budget": budget})
        else:
            out.line(res.to_json(timing=args.timing))
    out.close()
    _say(f"{len(inquiries)} inquiries, {failed} over budget")
    return EXIT_BUDGET if failed else EXIT_OK


def cmd_verify(args) -> int:
    _check_jobs(args.jobs)
    alg = get_algorithm(args.problem)
    graph, gconf = _graph_from_args(args)
    structure = structure_for(graph, alg)
    rf = _ranking_from_args(args, structure.n, structure)
    budget = budget_from_env()
    report = consistency_check(graph, args.problem, rf, method=args.method, budget=budget,
                               jobs=args.jobs, tamper=assignment_hook)
    out = Output(args.out)
    out.header("verify", {**gconf, **_ranking_config(rf), "problem": args.problem,
                          "method": args.method, "budget": budget, "jobs": args.jobs})
    out.line(report.summary())
    for x, got, want in report.mismatches[:MAX_DIFF_LINES]:
        out.line({"mismatch": x, "lca": got, "global": want})
    for kind, where in report.violations[:MAX_DIFF_LINES]:
        out.line({"violation": kind, "at": where})
    for x in report.budget_failures[:MAX_DIFF_LINES]:
        out.line({"budget_exceeded": x})
    out.close()
    if args.assignment_out:
        with open(args.assignment_out, "w") as fh:
            fh.writelines(line + "\n" for line in assignment_lines(report.results))
    s = report.summary()
    _say(f"{s['inquiries']} inquiries: {s['mismatches']} mismatches, "
         f"{s['violations']} violations, {s['budget_exceeded']} over budget")
    if report.mismatches or report.violations:
        return EXIT_MISMATCH
    if report.budget_failures:
        return EXIT_BUDGET
    return EXIT_OK


def cmd_stats(args) -> int:
    graph, gconf = _graph_from_args(args)
    if graph.n == 0:
        raise ParameterError("graph has no vertices")
    d = args.d if args.d is not None else structure_degree(graph)
    L_def, k_def = default_parameters(graph.n, d)
    L, k = args.L or L_def, args.k or k_def
    budget = budget_from_env()
    stats = vicinity_stats(graph, L, k, args.sample_size, args.trials, d=d,
                           rng_seed=args.rng_seed, budget=budget)
    out = Output(args.out)
    out.header("stats", {**gconf, "L": L, "k": k, "sample_size": args.sample_size,
                         "trials": args.trials, "budget": budget})
    for rec in stats.records:
        out.line(rec.to_json())
    summary = stats.summary()
    out.line({"summary": summary})
    out.close()
    _say(json.dumps(summary))
    return EXIT_OK


def _need(value, name: str):
    if value is None:
        raise ParameterError(f"this experiment needs --{name}")
    return value


def _run_grid(args) -> ExperimentReport:
    try:
        grid = sorted({int(x) for x in args.n_grid.split(",") if x.strip()})
    except ValueError:
        raise ParameterError(f"bad --n-grid {args.n_grid!r}") from None
    if not grid:
        raise ParameterError("--n-grid is empty")
    d = args.d if args.d is not None else 3.0
    trials = args.trials or 2000
    samples = None
    if args.jobs > 1 and len(grid) > 1:
        # Each size is sampled from its own streams, so splitting by size is exact.
        with ProcessPoolExecutor(min(args.jobs, len(grid))) as pool:
            futures = {n: pool.submit(sample_vicinities, args.family, n, d, trials,
                                      rng_seed=args.rng_seed, graphs=args.graphs) for n in grid}
            samples = {n: f.result() for n, f in futures.items()}
    common = dict(rng_seed=args.rng_seed, graphs=args.graphs, samples=samples)
    if args.name == "scaling":
        return vicinity_scaling_experiment(args.family, grid, d, trials,
                                           max_sample=args.max_sample, **common)
    return expected_moment_experiment(args.family, grid, d, trials, **common)


def cmd_experiment(args) -> int:
    _check_jobs(args.jobs)
    name = args.name
    if name in ("scaling", "moments"):
        report = _run_grid(args)
    elif name == "tightness":
        d = int(_need(args.d, "d"))
        report = tightness_experiment(d, _need(args.depth, "depth"), args.trials or 10000,
                                      rng_seed=args.rng_seed)
    elif name == "dominance":
        report = dominance_experiment(_need(args.n, "n"), int(_need(args.d, "d")))
    elif name == "legal-paths":
        report = legal_paths_experiment(_need(args.L, "L"), _need(args.t, "t"))
    elif name == "level-balance":
        report = level_balance_experiment(args.n or 2**14, args.d or 3.0, args.L or 16,
                                          args.seeds, rng_seed=args.rng_seed, c=args.c)
    else:
        report = exposure_experiment(args.n or 4096, args.d or 3.0, args.s or 64,
                                     args.trials or 1000, model=args.model,
                                     rng_seed=args.rng_seed)
    out = Output(args.out)
    out.header("experiment", {"name": name, **report.parameters})
    out.line(report.to_json(records=args.records))
    out.close()
    failed = [k for k, ok in report.verdicts.items() if not ok]
    _say(f"{name}: " + ("all verdicts passed" if not failed else "FAILED " + ", ".join(failed)))
    return EXIT_VERDICT if failed else EXIT_OK


COMMANDS = {"gen": cmd_gen, "query": cmd_query, "verify": cmd_verify, "stats": cmd_stats,
            "experiment": cmd_experiment}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ParameterError, GenerationError) as exc:
        _say(f"error: {exc}")
        return EXIT_PARAM
    except (GraphParseError, OSError) as exc:
        _say(f"error: {exc}")
        return EXIT_IO
    except BudgetExceeded as exc:
        _say(f"error: {exc}")
        return EXIT_BUDGET
    except LcaLabError as exc:
        _say(f"error: {exc}")
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
