"""Exception types shared across the package."""


class QlmsError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(QlmsError, ValueError):
    """Vector lengths do not agree (regressor vs. weights, ragged curves, ...)."""


class DomainError(QlmsError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class ParameterError(QlmsError, ValueError):
    """Invalid algorithm or experiment parameter."""


class DegenerateInputError(QlmsError, ValueError):
    """Input carries no usable signal (all-zero samples, zero reference norm)."""


class DivergenceError(QlmsError, RuntimeError):
    """A filter run produced a non-finite value.

    ``iteration`` is the first offending instant for a single run;
    ``run_indices`` lists the offending runs when raised by an ensemble.
    """

    def __init__(self, message, iteration=None, run_indices=None):
        super().__init__(message)
        self.iteration = iteration
        self.run_indices = run_indices or []


class ConfigError(QlmsError, ValueError):
    """Malformed experiment configuration (unknown fields, bad values)."""
