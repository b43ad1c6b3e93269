"""Exception types shared across the toolkit.

All inherit from ValueError so callers that do not care about the fine
distinction can catch one base class.
"""


class BinbenchError(ValueError):
    """Base class for all toolkit errors."""


class DecodeError(BinbenchError):
    """An image file could not be decoded."""


class ShapeMismatchError(BinbenchError):
    """Two images that must share dimensions do not."""


class EmptySeedError(BinbenchError):
    """A distance transform was requested for an empty seed set."""


class EmptyForegroundError(BinbenchError):
    """A ground truth with no foreground pixels where foreground is required."""


class InvalidSpecError(BinbenchError):
    """A degradation spec violates its invariants."""


class InsufficientMethodsError(BinbenchError):
    """Scoring needs at least two methods."""
