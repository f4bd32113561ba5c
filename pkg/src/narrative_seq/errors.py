"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, DataError exits 2,
NumericError exits 3.
"""


class NarrativeSeqError(Exception):
    """Base class for all package errors."""


class DataError(NarrativeSeqError):
    """Unusable input data: unreadable files, schema violations, duplicate ids."""


class DimensionError(NarrativeSeqError):
    """Tensor shape mismatch. Always names the offending shapes."""


class NumericError(NarrativeSeqError):
    """Non-finite values encountered during training."""


class CheckpointError(DataError):
    """Corrupt, truncated, or incompatible checkpoint file."""
