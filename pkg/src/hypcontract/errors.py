"""Exception hierarchy shared by the whole package."""


class HypContractError(Exception):
    """Base class for every error raised by this package."""


class DomainError(HypContractError, ValueError):
    """A point, map or model parameter violates its domain invariant."""


class BoundaryProximityError(DomainError):
    """A distance was requested between points too close to the ideal boundary."""


class QuadratureError(HypContractError, ArithmeticError):
    """Adaptive quadrature failed to reach its tolerance.

    ``where`` carries the offending evaluation point when one is known.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class UnsupportedModelError(HypContractError, TypeError):
    """An operation is not defined for the given model variant."""
