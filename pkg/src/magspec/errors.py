"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes.
"""


class MagspecError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DomainError(MagspecError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""

    exit_code = 2


class ConfigError(MagspecError, ValueError):
    """Incompatible or malformed configuration."""

    exit_code = 2


class NumericalError(MagspecError, ArithmeticError):
    """An iterative method failed to converge or an identity check failed."""

    exit_code = 3

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ResolutionError(MagspecError):
    """The grid or window is too coarse for the requested computation."""

    exit_code = 4

    def __init__(self, message, minimum=None):
        super().__init__(message)
        self.minimum = minimum
