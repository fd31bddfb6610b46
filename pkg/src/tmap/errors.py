"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Vector or matrix shapes are incompatible."""


class ParameterError(ValueError):
    """A scalar parameter is outside its admissible range."""


class DataError(ValueError):
    """Problem data violates its contract (e.g. labels outside {-1, +1})."""


class CapabilityError(TypeError):
    """An oracle does not provide a required capability."""


class NumericError(ArithmeticError):
    """NaN or Inf encountered where a finite value is required."""


class LinesearchError(RuntimeError):
    """Backtracking exhausted its iteration budget."""


class InsufficientDataError(ValueError):
    """Not enough usable samples for the requested estimate."""


class ParseError(ValueError):
    """Malformed input file.

    Carries the offending line number (1-based) when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
