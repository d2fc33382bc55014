"""Domain errors.  Every error carries an optional ``simplex`` naming the culprit."""

from __future__ import annotations


class DomainError(Exception):
    """Base class for all errors a well-formed request can raise."""

    def __init__(self, message: str = "", simplex=None):
        super().__init__(message)
        self.simplex = simplex


class SurfaceFormatError(DomainError):
    pass


class ClosureViolation(DomainError):
    pass


class GluingInconsistency(DomainError):
    pass


class NonPositiveTriangle(DomainError):
    pass


class Disconnected(DomainError):
    pass


class GaussBonnetMismatch(DomainError):
    pass


class ZeroArea(DomainError):
    pass


class DegenerateTriangle(DomainError):
    pass


class BudgetExceeded(DomainError):
    pass


class NotAGeodesic(DomainError):
    pass


class SameEndpoint(DomainError):
    pass


class DoesNotCross(DomainError):
    pass


class RankMismatch(DomainError):
    pass


class NotABasis(DomainError):
    pass


class AlreadyOrientable(DomainError):
    pass


class DependentFixedEdges(DomainError):
    pass


class CannotPerturb(DomainError):
    pass


class SeedNotShort(DomainError):
    pass


class SeedNotDisjoint(DomainError):
    pass


class ConstructionFailed(DomainError):
    pass


class VertexSetMismatch(DomainError):
    pass


class DegenerateFit(DomainError):
    pass


class NotContractive(DomainError):
    def __init__(self, message: str = "", node=None):
        super().__init__(message, simplex=("node", node))
        self.node = node
