"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class OmicsurvError(Exception):
    """Base class for all package errors."""


class ConfigError(OmicsurvError):
    """Invalid configuration value or malformed config file."""


class DataError(OmicsurvError):
    """Malformed or inconsistent input data."""
