"""Exception types shared across the package.

The CLI maps these onto process exit codes (usage 2, data 3, domain 4).
"""


class VKDEError(Exception):
    """Base class for all package errors."""


class DataError(VKDEError, ValueError):
    """Malformed or empty input data."""


class DomainError(VKDEError, ArithmeticError):
    """A quantity was requested outside the domain where it is defined."""


class KernelRegularityWarning(UserWarning):
    """The kernel profile violates the smoothness assumed by an asymptotic formula."""
