"""Exception types shared across the toolkit."""


class ConvexvalError(Exception):
    """Base class for all toolkit errors."""


class DomainError(ConvexvalError, ValueError):
    """Evaluation or query outside the valid domain."""


class NotConvexError(ConvexvalError, ValueError):
    """A pointwise minimum (or constructed function) failed convexity."""


class UnboundedError(ConvexvalError, ValueError):
    """An integral has no convergence certificate or provably diverges."""


class NonTerminatingError(ConvexvalError, RuntimeError):
    """A sum or materialization failed to terminate within its budget."""


class SlopeRangeExceededError(ConvexvalError, ValueError):
    """Dual grid range does not cover the slope range of the input."""

    def __init__(self, msg, required_range=None):
        super().__init__(msg)
        self.required_range = required_range


class SupportExceededError(ConvexvalError, ValueError):
    """Relevant support of a function leaves the numeric box."""


class InputError(ConvexvalError, ValueError):
    """Malformed input file or construction parameters."""
