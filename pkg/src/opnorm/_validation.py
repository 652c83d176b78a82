"""Input validation helpers in the style of ``sklearn.utils.validation``."""

import numbers

import numpy as np

_SYM_ATOL = 1e-12


def check_sym_matrix(A, *, copy=False, allow_negative=False):
    """Validate a square, symmetric, finite (and by default nonnegative) matrix.

    Returns a float64 C-contiguous array. Objects exposing ``entries`` (such as
    :class:`opnorm.core.SymMatrix`) are unwrapped.
    """
    A = getattr(A, "entries", A)
    arr = np.array(A, dtype=float, copy=True if copy else None, order="C", ndmin=2)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("expected a matrix with n >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix contains NaN or infinite entries")
    scale = max(1.0, float(np.abs(arr).max()))
    if not np.allclose(arr, arr.T, rtol=0.0, atol=_SYM_ATOL * scale):
        raise ValueError("matrix is not symmetric")
    if not allow_negative and np.any(arr < 0):
        raise ValueError("matrix has negative entries")
    return arr


def check_vector(x, n=None, *, name="x"):
    """Return ``x`` as a 1-d float64 array, optionally checking its length."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {n}")
    return arr


def check_exponent_pair(r, p):
    """Validate ``1 < p <= r < inf`` and return the pair as floats."""
    for name, val in (("r", r), ("p", p)):
        if not isinstance(val, numbers.Real) or isinstance(val, bool):
            raise TypeError(f"{name} must be a real number, got {val!r}")
    r, p = float(r), float(p)
    if not (np.isfinite(r) and np.isfinite(p)):
        raise ValueError("r and p must be finite")
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p}")
    if not p <= r:
        raise ValueError(f"p must be <= r (p > r is NP-hard), got p={p}, r={r}")
    return r, p


def check_positive(value, name):
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    return value
