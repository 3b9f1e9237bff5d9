"""Exception taxonomy shared by all ciderive modules.

Everything raised on purpose derives from CideriveError, so callers can
catch one base class at API boundaries (the CLI maps subclasses to exit
codes). Errors that carry evidence (a block split, a residual) expose it
as an attribute rather than only in the message.
"""

from __future__ import annotations


class CideriveError(Exception):
    """Base class for all errors raised by ciderive."""


class InvalidDistribution(CideriveError):
    """A would-be probability object violates its invariants."""


class NegativeEntry(InvalidDistribution):
    pass


class SumNotOne(InvalidDistribution):
    def __init__(self, total: float):
        super().__init__(f"entries sum to {total!r}, expected 1 within 1e-12")
        self.total = total
        self.deviation = total - 1.0


class InvalidCoupling(InvalidDistribution):
    """A conditional row of a coupling does not sum to 1 (or is negative)."""


class BadAxis(CideriveError):
    pass


class ShapeMismatch(CideriveError):
    pass


class EmptySupport(CideriveError):
    """An all-zero matrix where support is required."""


class NotBlock(CideriveError):
    """A block split was required but the matrix is not a block matrix."""


class IsBlock(CideriveError):
    """A non-block matrix was required; carries the split as evidence."""

    def __init__(self, split):
        super().__init__(f"matrix is a block matrix: {split}")
        self.split = split


class NotRMatrix(CideriveError):
    """Support is not a full Cartesian rectangle (or not positive on it)."""


class DegeneratePositivity(CideriveError):
    """No epsilon in the search schedule gave all-positive coefficients."""


class TooLarge(CideriveError):
    """Input exceeds a documented enumeration/materialization budget."""


class NotIndependent(CideriveError):
    pass


class BadMap(CideriveError):
    """A row/column map is not total on the required range."""


class OrderDecrease(CideriveError):
    """pad_witness asked to shrink the order."""


class BadN(CideriveError):
    pass


class OutOfRange(CideriveError):
    pass


class NotDyadic(CideriveError):
    pass


class SingularM(CideriveError):
    pass


class NonzeroSum(CideriveError):
    pass


class NoConvergence(CideriveError):
    """Iteration budget exhausted; carries the last residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class RowColNotRank1(CideriveError):
    pass


class MassMismatch(CideriveError):
    pass


class OrderCapExceeded(CideriveError):
    pass


class ZeroEntry(CideriveError):
    """A strictly positive matrix was required."""


class NegativeRate(CideriveError):
    pass


class EpsOutOfRange(CideriveError):
    pass


class ParseError(CideriveError):
    """Unreadable or malformed input file."""
