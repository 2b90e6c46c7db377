"""Package-level exception types.

DataError covers malformed input files and invalid dataset contents;
NumericalError covers failures of the numeric routines themselves
(non-positive-definite matrices, non-convergence, collapsed mixture
components). The CLI maps these onto distinct exit codes.
"""


class DataError(ValueError):
    """Raised for malformed or inconsistent input data."""


class NumericalError(RuntimeError):
    """Raised when a numerical routine cannot produce a valid result."""
