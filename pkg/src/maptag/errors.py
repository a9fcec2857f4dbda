"""Exception types shared across the package.

Each class maps to one failure category callers are expected to handle;
everything inherits from MaptagError so a bare except at the service
boundary can translate them into HTTP status codes.
"""


class MaptagError(Exception):
    """Base class for all errors raised by this package."""


class NotFoundError(MaptagError, LookupError):
    """A referenced entity (map, annotation, tag, user, resource) does not exist."""


class ValidationError(MaptagError, ValueError):
    """Input violates a documented precondition or invariant."""


class InsufficientDataError(MaptagError, ValueError):
    """Not enough data to perform the operation (e.g. too few control points)."""


class DegenerateGeometryError(MaptagError, ValueError):
    """Geometry is degenerate (collinear control points, zero-extent shape)."""


class OutOfRangeError(MaptagError, ValueError):
    """A coordinate lies outside the valid domain of a projection."""


class ProviderUnavailableError(MaptagError, RuntimeError):
    """A suggestion provider failed or could not be reached."""


class DegenerateTableError(MaptagError, ValueError):
    """A contingency table has a zero marginal total."""


class InvalidMatrixError(MaptagError, ValueError):
    """A rank-count matrix violates its balance invariants."""
