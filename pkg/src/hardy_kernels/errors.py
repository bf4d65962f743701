"""Exception hierarchy shared by the library and the command line."""


class HardyKernelsError(Exception):
    """Base class for all library errors."""

    exit_code = 2


class DomainError(HardyKernelsError, ValueError):
    """A parameter lies outside the admissible range."""

    exit_code = 1


class ConfigError(HardyKernelsError, ValueError):
    """A run configuration failed validation."""

    exit_code = 1


class NumericError(HardyKernelsError, ArithmeticError):
    """A quadrature or iteration failed to reach its accuracy target."""

    exit_code = 2


class FormatError(HardyKernelsError, IOError):
    """A persisted table or report has an unexpected layout."""

    exit_code = 1
