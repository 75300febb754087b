"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: validation failures exit 1, numeric
failures (divergence, singularities, estimation problems) exit 2, and I/O
problems exit 3.
"""


class ToolkitError(Exception):
    """Base class for all toolkit-specific failures."""


class ValidationError(ToolkitError, ValueError):
    """Invalid parameter value, configuration document, or input data."""


class InsufficientDataError(ValidationError):
    """Too few input entries to derive a result."""


class DivergenceError(ToolkitError, ArithmeticError):
    """Simulated state left the stable envelope."""

    def __init__(self, message: str, time_s: float | None = None):
        super().__init__(message)
        self.time_s = time_s


class SingularityError(ToolkitError, ArithmeticError):
    """Closed-form response is undefined at a requested frequency."""


class EstimationError(ToolkitError, ArithmeticError):
    """A spectral estimate could not be formed from the data."""


class CoverageError(EstimationError):
    """A magnitude curve does not cover the requested frequency band."""
