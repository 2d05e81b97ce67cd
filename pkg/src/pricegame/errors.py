"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An instance file or constructor argument violates an invariant."""


class HypothesisError(ValueError):
    """An operation was invoked on an instance outside its supported scope."""


class GridLimitError(RuntimeError):
    """A candidate-price grid exceeds the configured enumeration budget."""


class ScaleOverflowError(OverflowError):
    """Exact values do not fit the int64 fast path after rescaling."""


class UpConsistencyError(RuntimeError):
    """A price raise knocked some other seller's item out of the allocation.

    Carries the ascent trace collected so far in ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
