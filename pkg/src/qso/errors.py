"""Exception hierarchy.

Every validation failure maps to one named subclass of :class:`QSOError`.
Species indices in messages are 1-based.
"""


class QSOError(ValueError):
    """Base class for all validation and domain errors raised by ``qso``."""


class EmptyVector(QSOError):
    pass


class NegativeCoordinate(QSOError):
    pass


class NotNormalized(QSOError):
    pass


class NegativeEntry(QSOError):
    pass


class SymmetryViolation(QSOError):
    pass


class RowNotNormalized(QSOError):
    pass


class DimensionMismatch(QSOError):
    pass


class InvalidDimension(QSOError):
    pass


class IndexOutOfRange(QSOError, IndexError):
    pass


class EmptyRange(QSOError):
    pass


class ScheduleExhausted(QSOError):
    pass


class DegenerateSample(QSOError):
    pass


class FormatError(QSOError):
    """Malformed or unrecognised file content."""
