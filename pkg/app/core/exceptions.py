"""
Error hierarchy
Library code raises these; only the CLI maps them to exit codes.
"""
from typing import Optional


class GlmSelectionError(Exception):
    """Base class for all library errors"""


class DimensionMismatchError(GlmSelectionError, ValueError):
    """Array shapes disagree (design, response, support or parameter)"""


class SaturationError(GlmSelectionError, OverflowError):
    """Linear predictor beyond the representable range of exp()"""


class InvalidFitError(GlmSelectionError):
    """An operation that needs a converged fit received a failed one"""


class SingularMatrixError(GlmSelectionError):
    """A matrix that must be positive definite is not"""


class EnumerationTooLargeError(GlmSelectionError):
    """Exhaustive enumeration guard exceeded"""


class NoValidModelError(GlmSelectionError):
    """No model with a finite posterior weight is available"""


class ConfigError(GlmSelectionError):
    """Malformed or unsupported configuration document"""


class DataValidationError(GlmSelectionError):
    """
    Malformed input data.

    `line` is the 1-based line of the input file (header = line 1) or the
    1-based observation row when no file is involved; `column` names the column.
    """

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[str] = None):
        self.line = line
        self.column = column
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column '{column}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
