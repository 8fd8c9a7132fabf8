"""Exception hierarchy.

Validation problems (bad shapes, bad labels, malformed files) derive from
:class:`ValidationError`; numerical breakdowns derive from
:class:`NumericalError`.  The CLI maps the two families to distinct exit
codes.
"""


class TmrError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TmrError, ValueError):
    """Inputs violate a documented precondition."""


class NumericalError(TmrError, ArithmeticError):
    """A numerical routine could not produce a finite answer."""


class SingularSystem(NumericalError):
    """A linear system stayed singular after the ridge retry."""


class DimensionMismatch(ValidationError):
    pass


class TooFewPoints(ValidationError):
    """Fewer samples than requested neighbours (N <= K)."""


class TooFewLabeled(ValidationError):
    """Fewer labeled samples than requested neighbours."""


class ClassTooSmall(ValidationError):
    """A class cannot supply the requested number of labeled samples."""


class ParseError(ValidationError):
    """Malformed dataset file; message carries the row/column location."""

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class LabelError(ValidationError):
    """Label column holds a value that is not an integer."""
