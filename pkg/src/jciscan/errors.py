"""Semantic exception hierarchy for jciscan.

Every error raised by the library derives from :class:`JciscanError` so
callers can catch the whole family with one clause.  The CLI maps these
onto its exit-code contract (2 for malformed inputs, 3 for statistically
degenerate data, 1 for I/O failures).
"""

from __future__ import annotations


class JciscanError(Exception):
    """Base class for all jciscan errors."""


# --------------------------------------------------------------------------
# Statistics layer
# --------------------------------------------------------------------------


class DegenerateSample(JciscanError):
    """Too few samples to compute the requested statistic."""


class InvalidValue(JciscanError):
    """Input contains NaN/Inf or is otherwise outside the numeric domain."""


class DimensionMismatch(JciscanError):
    """Columns passed to a joint statistic have different lengths."""


class ZeroVarianceColumn(JciscanError):
    """A column's sample variance is at or below the positivity floor.

    ``index`` is the offending column id; -1 denotes the response column.
    """

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        if message is None:
            name = "response column" if index == -1 else f"column {index}"
            message = f"{name} has zero (or near-zero) sample variance"
        super().__init__(message)


# --------------------------------------------------------------------------
# Scanner layer
# --------------------------------------------------------------------------


class TooFewColumns(JciscanError):
    """Fewer than two predictor columns; no pairs exist."""


class InvalidPair(JciscanError):
    """Pair indices out of range or not strictly ordered."""


class EmptyRange(JciscanError):
    """A pair range selects no pairs."""


# --------------------------------------------------------------------------
# Simulation layer
# --------------------------------------------------------------------------


class EmptyReport(JciscanError):
    """Summary requested over zero replicate reports."""


# --------------------------------------------------------------------------
# Data I/O layer
# --------------------------------------------------------------------------


class FormatError(JciscanError):
    """Structurally malformed text input (header, row shape, emptiness)."""


class ParseError(JciscanError):
    """A cell failed to parse.  Carries 0-based data row and column ids."""

    def __init__(self, row: int, column: int, message: str | None = None):
        self.row = row
        self.column = column
        if message is None:
            message = f"cannot parse cell at data row {row}, column {column}"
        super().__init__(message)


class MissingResponse(JciscanError):
    """The named response column is absent from the header."""


class NotPackedFile(JciscanError):
    """Stream does not start with the packed-genotype magic bytes."""


class TruncatedFile(JciscanError):
    """Packed stream ended early.  Carries expected/actual byte counts."""

    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"truncated packed file: expected {expected} bytes, got {got}")


class MissingGenotype(JciscanError):
    """A missing genotype code was found under the reject policy."""

    def __init__(self, column: int, row: int):
        self.column = column
        self.row = row
        super().__init__(f"missing genotype at column {column}, row {row}")
