"""Exception hierarchy shared by the numerical routines and the CLI."""


class OpNormError(Exception):
    """Base class for all errors raised by :mod:`opnorm`."""

    exit_code = 1


class ReducibleError(OpNormError):
    """Raised when ``A^T A`` is reducible and the maximizer is not unique.

    ``witness`` is a tuple of vertex classes: either the connected components
    of the support graph, or the two sides of a bipartition.
    """

    exit_code = 2

    def __init__(self, message, kind, witness):
        super().__init__(message)
        self.kind = kind
        self.witness = witness


class ConvergenceError(OpNormError):
    """Raised when an iteration exhausts ``max_iter`` above tolerance."""

    exit_code = 3

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class DegenerateError(OpNormError):
    """Raised for the zero matrix or when an iterate collapses to zero."""

    exit_code = 3


class InstabilityError(OpNormError):
    """Raised when a finite-difference estimate is not stable under step halving."""

    exit_code = 3
