"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Malformed or invalid market input."""


class CapExceeded(RuntimeError):
    """An enumeration would exceed the configured size limit."""


class PreconditionError(ValueError):
    """A construction was called outside the conditions it is valid for.

    ``reason`` is a short machine-readable tag and ``witness`` carries the
    offending object (an allocation, an index, ...) when there is one.
    """

    def __init__(self, message, reason=None, witness=None):
        super().__init__(message)
        self.reason = reason
        self.witness = witness


class TheoremAlarm(AssertionError):
    """A computed result contradicts a proven guarantee.

    Raised instead of silently reporting, since it means either a bug here or
    a counterexample to the mathematics.
    """
