"""Exception types shared across the package."""


class AgingFrameError(Exception):
    """Base class for package errors."""


class InvalidScenarioError(AgingFrameError, ValueError):
    """A scenario/config value violates a model invariant."""


class InvalidLayoutError(AgingFrameError, ValueError):
    """A frame layout violates the multi-frame structure rules."""


class MisuseError(AgingFrameError, ValueError):
    """An operation was called on the wrong kind of slot or with
    mismatched dimensions."""


class NumericalError(AgingFrameError, ArithmeticError):
    """A linear-algebra step failed beyond repairable roundoff."""


class SolverError(AgingFrameError, RuntimeError):
    """An iterative solver failed to converge."""

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])
