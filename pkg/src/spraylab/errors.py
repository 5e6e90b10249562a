"""Exception hierarchy shared by every spraylab module."""

from __future__ import annotations


class SprayLabError(Exception):
    """Base class for all spraylab errors."""


# jets / expressions

class SingularJet(SprayLabError, ArithmeticError):
    """A denominator or branch argument is within the singular floor.

    Usually means the sample point sits too close to a domain boundary.
    """


class OrderExceeded(SprayLabError, ValueError):
    pass


class ExprSyntaxError(SprayLabError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifier(SprayLabError, ValueError):
    pass


class IndexOutOfRange(SprayLabError, ValueError):
    pass


class DivisionByZero(SprayLabError, ZeroDivisionError):
    pass


# models / catalog

class UnknownCatalogId(SprayLabError, KeyError):
    pass


class MissingParam(SprayLabError, KeyError):
    pass


class DegenerateMetric(SprayLabError, ArithmeticError):
    pass


class StepUnderflow(SprayLabError, ArithmeticError):
    pass


class DegreeMismatch(SprayLabError, ValueError):
    pass


class EmptyDomain(SprayLabError, ValueError):
    pass


class EmptyPointSet(SprayLabError, ValueError):
    pass


# curvature / hamel / projective

class NonpositiveDensity(SprayLabError, ValueError):
    pass


class KindMismatch(SprayLabError, ValueError):
    pass


class UnsupportedOrder(SprayLabError, ValueError):
    pass


class ZeroAdjointFunction(SprayLabError, ArithmeticError):
    pass


class NotScalarCurvature(SprayLabError, ValueError):
    pass


class NonpositiveMetric(SprayLabError, ValueError):
    pass


class ZeroOneForm(SprayLabError, ArithmeticError):
    pass


class PreconditionFailed(SprayLabError, ValueError):
    pass


# funk solver

class NoConvergence(SprayLabError, RuntimeError):
    pass


class OutsideNeighborhood(SprayLabError, ValueError):
    pass


# cli

class ConfigError(SprayLabError, ValueError):
    """Invalid run configuration; carries the offending config path."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
