"""Exception types shared across the toolkit.

Two failure families map onto process exit codes used by the CLI:
configuration errors (exit code 2) and data errors (exit code 3).
Each class carries a short machine-readable ``code``.
"""


class ScopeBenchError(Exception):
    code = "error"
    exit_code = 1


class ConfigError(ScopeBenchError):
    """Invalid parameters, malformed configs, unresolved setup."""

    code = "config"
    exit_code = 2


class DataError(ScopeBenchError):
    """Inconsistent or corrupt input data."""

    code = "data"
    exit_code = 3


class DimensionMismatchError(DataError):
    code = "dimension-mismatch"


class PayloadSizeError(DataError):
    code = "payload-size"


class NonFiniteError(DataError):
    code = "non-finite"


class DuplicateIdError(DataError):
    code = "duplicate-id"


class UnresolvedIdError(DataError):
    code = "unresolved-id"
