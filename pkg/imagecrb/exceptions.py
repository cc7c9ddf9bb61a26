"""
Exception hierarchy shared by every app.

Configuration problems map to exit code 2 in the command-line front end,
numerical failures to exit code 3.
"""


class QuantImageError(Exception):
    """Base class for all errors raised by imagecrb."""

    exit_code = 1


class ConfigurationError(QuantImageError, ValueError):
    """Invalid arguments, value-type invariants or run configuration."""

    exit_code = 2


class NumericError(QuantImageError, ArithmeticError):
    """A computation could not produce a trustworthy number."""

    exit_code = 3


class GridMismatchError(NumericError):
    """Two fields or gains live on different transverse grids."""

    def __init__(self, message="incompatible grids"):
        super().__init__(message)


class NullFieldError(NumericError):
    """A field has (numerically) zero norm."""

    def __init__(self, message="null field"):
        super().__init__(message)


class ModelEvaluationError(NumericError):
    """An image model produced non-finite values."""


class DerivativeUnreliableError(NumericError):
    """Finite-difference derivatives at two step sizes disagree."""


class ParameterNotEncodedError(NumericError):
    """The mean field does not depend on p at all."""

    def __init__(self, message="parameter not encoded"):
        super().__init__(message)


class NoIntensitySchemeError(NumericError):
    """The intensity profile carries no information on p (a is infinite)."""


class SchemeConfigurationError(NumericError):
    """A detection scheme is used outside the configuration it is defined for."""


class SamplingError(NumericError):
    """Monte Carlo preconditions are not met."""
