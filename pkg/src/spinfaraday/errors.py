class SpinFaradayError(Exception):
    """Base class for package errors."""


class DomainError(SpinFaradayError, ValueError):
    """An argument lies outside the domain of the operation."""


class ContractError(SpinFaradayError, ValueError):
    """An operation was called with an argument kind it does not accept."""


class ConfigError(SpinFaradayError, ValueError):
    """Invalid configuration or sweep specification."""

    exit_code = 5


class ConfigFileNotFound(ConfigError):
    exit_code = 3


class ConfigParseError(ConfigError):
    exit_code = 4
