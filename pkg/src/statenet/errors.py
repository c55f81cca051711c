"""Exception types shared across the package.

The CLI maps these onto process exit codes: config/usage problems exit 1,
data/parse problems exit 2, numeric problems exit 3.
"""


class StatenetError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(StatenetError):
    """Vector or matrix dimensions do not match the operation's contract."""


class DataError(StatenetError):
    """Input data violates a documented invariant (bad label, empty text, ...)."""


class ParseError(DataError):
    """A file could not be parsed; message carries the offending row/line."""


class NumericError(StatenetError):
    """Non-finite values or a numerically unsolvable system."""


class ConfigError(StatenetError):
    """Invalid configuration value or combination."""
