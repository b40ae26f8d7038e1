"""Exception hierarchy shared across the package."""


class CoatError(Exception):
    """Base class for all package errors."""


class DomainError(CoatError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class ParameterError(CoatError, ValueError):
    """Invalid tuning or rule parameter."""


class ConfigurationError(CoatError, ValueError):
    """Inconsistent configuration, e.g. too few samples for the fold count."""


class DataError(CoatError, ValueError):
    """Malformed or unusable input data."""


class ParseError(DataError):
    """A cell of an input table could not be parsed."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column
