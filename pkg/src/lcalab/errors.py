"""Exception hierarchy shared by all lcalab modules."""

from __future__ import annotations


class LcaLabError(Exception):
    """Base class for every error raised by lcalab."""


class ParameterError(LcaLabError, ValueError):
    """An argument violates a documented precondition."""


class GenerationError(LcaLabError, RuntimeError):
    """A random generator exhausted its retry budget."""


class GraphParseError(LcaLabError, ValueError):
    """A graph file is malformed. ``lineno`` is 1-based."""

    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class BudgetExceeded(LcaLabError, RuntimeError):
    """An exploration grew past its vertex budget."""

    def __init__(self, center: int, budget: int):
        super().__init__(f"exploration from {center} exceeded budget of {budget} vertices")
        self.center = center
        self.budget = budget
