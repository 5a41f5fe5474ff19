"""Exception hierarchy shared across the package."""


class GazeAuthError(Exception):
    """Base class for every error raised by this package."""


class DegeneratePath(GazeAuthError):
    """Path has no usable geometry: fewer than 2 points or zero arc length."""


class DegenerateBBox(GazeAuthError):
    """Bounding box is thinner than the minimum dimension along x or y."""


class InsufficientSamples(GazeAuthError):
    """Raw trace carries too few samples to represent a pursuit."""


class LengthMismatch(GazeAuthError):
    """Paths that must be index-aligned have different point counts."""


class RangeError(GazeAuthError, ValueError):
    """Normalized time outside [0, 1]."""


class ParseError(GazeAuthError):
    """Document could not be parsed."""


class InvariantViolation(GazeAuthError):
    """Parsed document violates a structural rule."""


class MissingShape(GazeAuthError):
    """Training data does not cover every shape."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__(f"missing traces for shapes: {', '.join(self.missing)}")


class EmptyDataset(GazeAuthError):
    pass


class TooFewSamples(GazeAuthError):
    pass


class ConfigError(GazeAuthError):
    pass


class StorageFailure(GazeAuthError):
    pass


class NotFound(GazeAuthError):
    pass


class UnknownUser(GazeAuthError):
    pass


class SessionOrder(GazeAuthError):
    """Frame submitted to a session that already reached a decision."""


class SessionIncomplete(GazeAuthError):
    """Decision requested before all three frames were recorded."""


class LockedOut(GazeAuthError):
    """Rate limiting refused the request."""
