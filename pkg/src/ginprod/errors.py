"""Shared exception types.

Every failure mode raised by this package maps onto one of the classes
below so callers (and the CLI exit-code logic) can branch on category
rather than on message text.
"""


class GinprodError(Exception):
    """Base class for all package errors."""


class DomainError(GinprodError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class DimensionError(GinprodError, ValueError):
    """Matrix or profile dimensions are invalid or do not chain."""


class CapabilityError(GinprodError, ValueError):
    """The request is valid but beyond the supported desk scale."""


class DegenerateSampleError(GinprodError, ArithmeticError):
    """A probability-zero degenerate sample occurred (e.g. rank collapse)."""


class PrecisionError(GinprodError, ArithmeticError):
    """Working precision was insufficient; retry with more bits."""


class AccuracyError(GinprodError, ArithmeticError):
    """A quadrature or inversion failed to stabilize to its target."""
