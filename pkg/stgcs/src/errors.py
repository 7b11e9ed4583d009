"""Exception hierarchy for the planner library."""


class STGCSError(Exception):
    """Base class for every error raised by stgcs."""


class ContractError(STGCSError, ValueError):
    """An argument violates an operation's precondition (dimensions, ordering, degeneracy)."""


class EmptySetError(ContractError):
    """An operation needed a nonempty set."""


class UnsupportedDimensionError(ContractError):
    """The operation only supports a specific spatial dimension."""


class UnboundedError(STGCSError):
    """A set is unbounded in a coordinate that had to be bounded."""


class SolverError(STGCSError, RuntimeError):
    """The LP back-end failed for numerical reasons."""

    def __init__(self, message, status=None, solver_message=None):
        super().__init__(message if solver_message is None else f'{message}: [{status}] {solver_message}')
        self.status = status
        self.solver_message = solver_message


class CoverageError(STGCSError):
    """Part of a trajectory lies outside every vertex set of the graph."""

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class LoadError(STGCSError):
    """An instance or solution file is malformed or geometrically inconsistent."""


class CrowdingError(STGCSError):
    """Random instance sampling could not place all robots."""
