"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: configuration problems exit 1,
numerical accuracy problems exit 2 and resource budgets exit 3.
"""


class ZenoError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class DomainError(ZenoError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""

    exit_code = 1


class ConfigError(ZenoError, ValueError):
    exit_code = 1


class AccuracyError(ZenoError, ArithmeticError):
    """A numerical procedure could not reach its tolerance."""

    exit_code = 2

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class IntegratorError(AccuracyError):
    """Master-equation integration drifted (trace, Hermiticity or positivity)."""


class ConsistencyError(ZenoError, ArithmeticError):
    """An analytically impossible value showed up (e.g. log of a non-positive survival)."""

    exit_code = 2


class ResourceError(ZenoError):
    """A computation would exceed its configured size budget."""

    exit_code = 3

    def __init__(self, message, size=None):
        super().__init__(message)
        self.size = size
