"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: usage/config problems exit 1, data
problems exit 2, numerical failures exit 3.
"""


class InfoflowError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(InfoflowError):
    """Invalid configuration or CLI usage."""

    exit_code = 1


class DataError(InfoflowError):
    """Malformed, out-of-domain or insufficient input data."""

    exit_code = 2


class EmptyOverlapError(DataError):
    """Activity data and trading calendar do not overlap."""


class NumericalError(InfoflowError):
    """A numerical procedure failed on otherwise well-formed data."""

    exit_code = 3


class DegenerateSampleError(NumericalError):
    """Sample has zero variance or is too small for the estimator."""


class SingularDesignError(NumericalError):
    """Regression design matrix is rank deficient."""


class ConvergenceError(NumericalError):
    """Iterative optimizer failed to converge or hit a boundary."""
