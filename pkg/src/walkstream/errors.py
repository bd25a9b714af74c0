"""Exceptions raised by walkstream."""


class WalkStreamError(Exception):
    """Base class for all walkstream errors."""


class ParseError(WalkStreamError, ValueError):
    """An edge-list or turnstile file could not be parsed."""


class DuplicateEdge(WalkStreamError, ValueError):
    """An edge appears more than once in an edge list."""


class OrderingMismatch(WalkStreamError, ValueError):
    """A custom edge ordering is not a permutation of the graph's edges."""


class InvalidTurnstile(WalkStreamError, ValueError):
    """A turnstile stream leaves some edge with a net count outside {0, 1}."""


class CapExceeded(WalkStreamError, ValueError):
    """A walk horizon is larger than the oracle's configured cap."""


class BudgetExceeded(WalkStreamError, ValueError):
    """Exact walk enumeration would exceed the configured budget."""


class DeadEnd(WalkStreamError):
    """A walk reached a vertex without out-neighbors."""

    def __init__(self, vertex: int, message: str | None = None) -> None:
        self.vertex = vertex
        super().__init__(message or f'Vertex {vertex} has no out-neighbors.')


class SketchFailure(WalkStreamError):
    """A turnstile sketch failed to produce a sample or recovery for a vertex that needed one."""

    def __init__(self, vertex: int, message: str | None = None) -> None:
        self.vertex = vertex
        super().__init__(message or f'Sketch failed for vertex {vertex}.')


class WalkFailure(WalkStreamError):
    """A sampler returned Failure (surfaced by the command line as an exit code)."""

    def __init__(self, vertex: int, step: int) -> None:
        self.vertex = vertex
        self.step = step
        super().__init__(f'Sampler exhausted the list of vertex {vertex} at step {step}.')


class DeadEndVertex(UserWarning):
    """Every first-pass trial walk from a vertex hit a dead end."""


class PassBudgetExceeded(WalkStreamError, AssertionError):
    """A stream handle was replayed more times than its pass budget allows."""
