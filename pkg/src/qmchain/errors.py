"""Exception hierarchy shared across the package.

Two failure categories are kept apart because the CLI maps them to
different exit codes: bad inputs (exit 1) versus numerical results that
contradict a structural guarantee (exit 2).
"""


class QmchainError(Exception):
    """Base class for all package errors."""


class PreconditionError(QmchainError):
    """An operation was called with inputs that violate its contract."""


class DimensionMismatchError(PreconditionError):
    """Operands live on different Hilbert spaces."""


class TheoremViolationError(QmchainError):
    """A computed quantity breaks a guaranteed structural bound.

    Signals numerical trouble or an input that is not the quantum
    operation it claims to be, e.g. a spectral radius beyond 1 + tol or
    a singular peripheral Gram matrix.
    """
