"""Exceptions raised across the package.

``ValidationError`` covers bad input (configs, fields, samples) and maps to
exit status 2 on the command line; ``NumericalError`` covers failures of the
numerics themselves and maps to exit status 3.
"""


class FpeitError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(FpeitError, ValueError):
    pass


class DomainError(ValidationError):
    """A point lies outside the closed unit disk (or r outside [0, 1])."""


class NumericalError(FpeitError, ArithmeticError):
    pass
