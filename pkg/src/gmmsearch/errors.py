"""Exception taxonomy shared across the package."""


class InputError(ValueError):
    """Caller passed invalid data, shapes or configuration."""


class ParseError(InputError):
    """A file could not be parsed; the message names the offending line."""


class DegenerateDataError(InputError):
    """A statistic is undefined for this input (e.g. all paired differences zero)."""


class NumericError(ArithmeticError):
    """A numeric computation produced a non-finite or undefined result."""


class EmFailure(NumericError):
    """EM diverged: non-finite likelihood or a covariance factorization failed."""


class InitFailure(RuntimeError):
    """An initializer could not produce usable starting parameters."""


class SearchFailure(RuntimeError):
    """Every candidate in the search grid failed."""
