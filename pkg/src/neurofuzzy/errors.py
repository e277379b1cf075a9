"""Exception types raised across the package."""


class NeuroFuzzyError(Exception):
    """Base class for all package errors."""


class ParameterError(NeuroFuzzyError, ValueError):
    """Membership-function parameters have the wrong arity or ordering."""


class ConfigurationError(NeuroFuzzyError, ValueError):
    """An argument or configuration value is outside its valid range."""


class ShapeError(NeuroFuzzyError, ValueError):
    """Array dimensions do not agree."""


class NumericError(NeuroFuzzyError, ArithmeticError):
    """Non-finite values where finite numbers are required."""


class DomainError(NeuroFuzzyError, ValueError):
    """Function evaluated outside its mathematical domain."""


class IngestionError(NeuroFuzzyError, ValueError):
    """A data file could not be read into a dataset."""


class MissingColumnError(IngestionError, KeyError):
    """A requested column is absent from a CSV header."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""
