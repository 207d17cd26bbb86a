"""Exception types shared across the package."""


class EpistabError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(EpistabError, ValueError):
    """Matrix or vector shapes do not conform."""


class ValidationError(EpistabError, ValueError):
    """An input violates a documented precondition."""


class SingularMatrixError(EpistabError, ArithmeticError):
    """Linear solve hit a pivot that is zero to working precision."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class InstabilityError(EpistabError, RuntimeError):
    """An operation requires a Schur-stable closed loop (rho < 1)."""

    def __init__(self, message, rho=None):
        super().__init__(message)
        self.rho = rho


class ConvergenceError(EpistabError, RuntimeError):
    """An iterative solver failed to converge within its budget."""

    def __init__(self, message, last_delta=None):
        super().__init__(message)
        self.last_delta = last_delta


class DivergenceError(EpistabError, RuntimeError):
    """A simulated trajectory overflowed the numeric guard."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DegenerateDataError(EpistabError, ValueError):
    """A statistic is undefined on the given data (e.g. zero variance)."""


class SearchError(EpistabError, RuntimeError):
    """A grid search had no admissible candidate."""


class CsvFormatError(EpistabError, ValueError):
    """A CSV file does not match the expected schema."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
