"""Exception hierarchy shared by every fdnet module."""


class FdnetError(Exception):
    """Base class for all fdnet errors."""


class DomainError(FdnetError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(FdnetError):
    """A problem instance is too large for exhaustive enumeration."""


class AlgorithmError(FdnetError, RuntimeError):
    """An iterative algorithm hit its safety cap."""


class ConfigError(FdnetError, ValueError):
    """A configuration is semantically invalid.

    ``key`` names the offending configuration key when there is one.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class ConfigSyntaxError(ConfigError):
    """A configuration file could not be tokenized."""

    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
