"""Exception types shared across the package."""


class AtildeError(Exception):
    """Base class for package errors."""


class ConfigurationError(AtildeError):
    """Unsupported parameters, e.g. a field order with no modulus table."""


class UsageError(AtildeError, ValueError):
    """Invalid arguments or malformed input."""


class ParseError(UsageError):
    """Malformed input file; the message names the offending field."""


class ConsistencyError(AtildeError):
    """Internal tables disagree with the group axioms (bad presentation or bug)."""


class RangeError(AtildeError):
    """A query needs more of the Cayley ball than was built."""


class BudgetExceeded(AtildeError):
    """Ball construction hit the vertex cap; ``partial`` holds what was built."""

    def __init__(self, message, partial=None, high_water=0):
        super().__init__(message)
        self.partial = partial
        self.high_water = high_water


class DepthError(AtildeError):
    """A cylinder is too shallow for the displacement vector to be defined."""
