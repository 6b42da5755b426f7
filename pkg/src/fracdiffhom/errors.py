"""Exception and warning types raised across the package."""

from __future__ import annotations


class FracHomError(Exception):
    """Base class for all package errors."""


class NonConvergence(FracHomError, ArithmeticError):
    pass


class UnsupportedRange(FracHomError, ValueError):
    pass


class GridMismatch(FracHomError, ValueError):
    pass


class EllipticityViolation(FracHomError, ValueError):
    pass


class AsymmetricInput(FracHomError, ValueError):
    pass


class CoefficientOutOfBounds(FracHomError, ValueError):
    pass


class SingularSystem(FracHomError, ArithmeticError):
    pass


class OutOfDomain(FracHomError, ValueError):
    pass


class ObservationOutOfRange(FracHomError, ValueError):
    pass


class MonotonicityViolation(FracHomError, ValueError):
    pass


class DegenerateInitialData(FracHomError, ValueError):
    pass


class WindowTooEarly(FracHomError, ValueError):
    pass


class FamilyNotMonotone(FracHomError, ValueError):
    pass


class ConfigError(FracHomError, ValueError):
    pass


class ResolutionError(FracHomError, ValueError):
    pass


class ResolutionWarning(UserWarning):
    """The spatial grid does not resolve the coefficient microstructure."""
