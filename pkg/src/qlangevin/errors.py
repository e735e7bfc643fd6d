"""Exception types raised by the numerical kernels.

Each class carries the short machine-readable ``code`` used in CLI error
messages and validation reports.
"""


class QLangevinError(Exception):
    code = "error"


class Mat2OverflowError(QLangevinError, OverflowError):
    """A matrix exponential argument exceeds the double-precision range."""

    code = "overflow"


class DefectiveMatrixError(QLangevinError, ValueError):
    """No primary square root exists (nonzero nilpotent matrix)."""

    code = "defective"


class SingularBoundaryError(QLangevinError):
    """Backward-wave boundary problem hit a pole (mirrorless oscillation)."""

    code = "singular_boundary"


class SingularDriftError(QLangevinError):
    code = "singular_drift"


class GridUnresolvedError(QLangevinError):
    """Doubling the frequency grid changed a time-domain result too much."""

    code = "grid_unresolved"


class ConfigError(QLangevinError, ValueError):
    code = "config"
