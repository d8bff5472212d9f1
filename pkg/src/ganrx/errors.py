"""Exception hierarchy shared across the package.

The CLI maps these (plus OSError) to exit code 1; UsageError maps to exit
code 2.
"""


class GanrxError(Exception):
    """Base class for runtime/data failures raised by this package."""


class FormatError(GanrxError):
    """A file does not conform to its declared on-disk format."""


class DataError(GanrxError):
    """Input data violates a documented precondition (lengths, finiteness,
    empty or single-class inputs)."""


class ShapeError(GanrxError):
    """Array/spectrum shapes are incompatible."""


class PlacementError(GanrxError):
    """Target blocks are out of bounds, overlapping, or cannot be laid out."""


class NumericError(GanrxError):
    """A numeric quantity became non-finite where finiteness is required."""


class StateError(GanrxError):
    """An operation was called in the wrong mode or lifecycle state."""


class UsageError(Exception):
    """Bad command-line flags or config keys/values (CLI exit code 2)."""
