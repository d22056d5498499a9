"""Exception hierarchy.

Every error raised by the package derives from :class:`CurveANNError`.
Errors caused by bad input also derive from :class:`ValueError` so callers
that only care about "invalid argument" can catch that.
"""


class CurveANNError(Exception):
    """Base class for all package errors."""


class DataError(CurveANNError, ValueError):
    """Invalid input data (curves, points, files)."""


class DimensionMismatch(DataError):
    pass


class EmptyCurve(DataError):
    pass


class EmptyDataset(DataError):
    pass


class NonFiniteCoordinate(DataError):
    pass


class DuplicateId(DataError):
    pass


class InvalidP(CurveANNError, ValueError):
    pass


class InvalidParameter(CurveANNError, ValueError):
    pass


class TooLargeForBruteForce(CurveANNError, ValueError):
    pass


class LimitExceeded(CurveANNError, ValueError):
    """A combinatorial size guard tripped."""


class InvalidTraversal(CurveANNError, ValueError):
    pass


class InvalidSignature(CurveANNError, ValueError):
    pass


class IncompatibleSignature(CurveANNError, ValueError):
    pass


class DimensionOverflow(CurveANNError, ValueError):
    """Requested target dimension exceeds the configured cap."""


class LengthMismatch(DataError):
    pass


class DimensionTooLargeForGrid(CurveANNError, ValueError):
    pass


class InvalidRadiusRange(CurveANNError, ValueError):
    pass


class DegenerateDataset(CurveANNError, ValueError):
    """All vectors coincide; no positive pairwise distance exists."""


class BuildBudgetExceeded(LimitExceeded):
    pass


class EmptyIndex(CurveANNError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class CorruptIndex(CurveANNError):
    pass


class VersionMismatch(CurveANNError):
    pass
