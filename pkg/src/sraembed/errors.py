"""Exception hierarchy.

Every error that reports a concrete failing configuration carries it in
``witness`` (a tuple of point indices, possibly with extra data) so callers
and the CLI can print it without parsing messages.
"""

from __future__ import annotations


class SraEmbedError(Exception):
    """Base class for all package errors."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class MetricError(SraEmbedError, ValueError):
    """The input matrix is not a valid finite metric."""


class NotSquare(MetricError):
    pass


class NonFiniteDistance(MetricError):
    pass


class NotSymmetric(MetricError):
    pass


class NegativeDistance(MetricError):
    pass


class NonzeroDiagonal(MetricError):
    pass


class DuplicatePoint(MetricError):
    pass


class TriangleViolation(MetricError):
    pass


class HypothesisError(SraEmbedError):
    """A precondition of a construction does not hold on the given data."""


class NotSraFree(HypothesisError):
    """The space contains a k-point SRA(alpha) subset; ``level`` is the recursion depth."""

    def __init__(self, message: str, witness=None, level: int = 0):
        super().__init__(message, witness)
        self.level = level


class CoordinateNotLipschitz(HypothesisError):
    pass


class ChartTooSmall(HypothesisError):
    pass


class ChartNotNoncontracting(HypothesisError):
    pass


class ChartDistortionExceeded(HypothesisError):
    pass


class ConfigWrongSize(HypothesisError):
    pass


class ConfigNotSra(HypothesisError):
    pass


class MapClaimViolated(HypothesisError):
    """A PointMap does not satisfy the scale/distortion it claims."""


class DegenerateDomain(SraEmbedError, ValueError):
    pass


class InvalidSpec(SraEmbedError, ValueError):
    pass
