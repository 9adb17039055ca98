"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures onto its documented codes (1 usage, 2 data, 3 property violation).
"""

from __future__ import annotations


class TsMatchError(Exception):
    exit_code = 2


class UsageError(TsMatchError):
    exit_code = 1


class DataError(TsMatchError, ValueError):
    exit_code = 2


class PropertyViolation(TsMatchError, AssertionError):
    exit_code = 3


# -- loading / core --------------------------------------------------------

class ParseError(DataError):
    def __init__(self, line: int, column: int, token: str = ""):
        self.line = line
        self.column = column
        self.token = token
        super().__init__(f"line {line}, column {column}: cannot parse {token!r} as a number")


class EmptyDataset(DataError):
    pass


class OutOfBounds(DataError, IndexError):
    pass


# -- windowing ---------------------------------------------------------------

class WindowTooLong(DataError):
    pass


class InvalidSlidingFactor(DataError):
    pass


# -- transforms ------------------------------------------------------------

class FrameMismatch(DataError):
    pass


class TooManyCoefficients(DataError):
    pass


class NotPowerOfTwo(DataError):
    pass


class TooManySegments(DataError):
    pass


# -- distances / bounds ------------------------------------------------------

class LengthMismatch(DataError):
    pass


class InvalidP(DataError):
    pass


class EmptyInput(DataError):
    pass


class InfeasibleConstraint(DataError):
    pass


class TransformMismatch(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class BoundViolation(PropertyViolation):
    pass


# -- index / matcher -------------------------------------------------------

class NoIndexableSequence(DataError):
    pass


class IndexConfigMismatch(UsageError):
    pass


class IndexFormatError(DataError):
    pass


class QueryTooLong(DataError):
    pass


class QueryShorterThanWindow(DataError):
    pass


class WindowTooLargeForQuery(DataError):
    pass


class NotEnoughPlacements(DataError):
    pass


# -- motifs ----------------------------------------------------------------

class TooManyClusters(DataError):
    pass


# -- configuration ---------------------------------------------------------

class UnknownFlag(UsageError):
    pass


class ConflictingOptions(UsageError):
    pass


class MissingRequired(UsageError):
    pass
