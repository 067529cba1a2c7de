"""Local computation algorithms built from neighborhood-dependent online algorithms.

A seeded ranking orders the vertices; an inquiry about ``v`` explores the
relevant vicinity of ``v`` through a counting neighbor oracle and replays a
greedy online algorithm there, reproducing the answer the global greedy run
would give.
"""

__version__ = "0.1.0"

from .engine import (ALGORITHMS, COLORING, MATCHING, MIS, InquiryResult, OnlineAlgorithm,
                     global_online_run, lca_answer, lca_answer_method1, lca_answer_method2,
                     verify_assignment)
from .errors import (BudgetExceeded, GenerationError, GraphParseError, LcaLabError,
                     ParameterError)
from .graph import (GeneratorSpec, Graph, GraphOracle, LineGraph, generate, load_graph,
                    save_graph)
from .ordering import Rank, RankingFunction, default_parameters, sample_ranking
from .vicinity import Vicinity, containing_vicinity, relevant_vicinity

__all__ = [
    "ALGORITHMS", "COLORING", "MATCHING", "MIS", "BudgetExceeded", "GenerationError",
    "GeneratorSpec", "Graph", "GraphOracle", "GraphParseError", "InquiryResult", "LcaLabError",
    "LineGraph", "OnlineAlgorithm", "ParameterError", "Rank", "RankingFunction", "Vicinity",
    "containing_vicinity", "default_parameters", "generate", "global_online_run", "lca_answer",
    "lca_answer_method1", "lca_answer_method2", "load_graph", "relevant_vicinity",
    "sample_ranking", "save_graph", "verify_assignment",
]
