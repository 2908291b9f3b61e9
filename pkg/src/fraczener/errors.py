"""Exception types raised across the package."""


class FracZenerError(ValueError):
    """Base class for all package errors."""


class MissingOrder(FracZenerError):
    pass


class NonPositiveCoefficient(FracZenerError):
    pass


class ExponentOutOfRange(FracZenerError):
    pass


class ZeroArgument(FracZenerError):
    pass


class PoleHit(FracZenerError):
    pass


class UnknownModel(FracZenerError):
    pass


class DegenerateGap(FracZenerError):
    pass


class UnsupportedShape(FracZenerError):
    pass


class Divergence(FracZenerError):
    pass


class ParameterWindow(FracZenerError):
    pass


class NotConverged(FracZenerError):
    pass


class PoleOnBoundary(FracZenerError):
    pass


class ContourFailure(FracZenerError):
    pass


class WrongModelShape(FracZenerError):
    pass


class DerivativeVanishes(FracZenerError):
    pass


class GridTooCoarse(FracZenerError):
    pass
