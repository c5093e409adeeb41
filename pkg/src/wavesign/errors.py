"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class CapacityError(ValueError):
    """A brute-force routine was asked for a problem size it refuses to enumerate."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped without meeting its tolerance.

    The residual trace is kept on the exception so callers can inspect or
    report how far the iteration got.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []
