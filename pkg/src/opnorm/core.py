"""Scalar and vector maps, norms and the symmetric nonnegative matrix type."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_exponent_pair, check_sym_matrix, check_vector

__all__ = [
    "SymMatrix",
    "NormParams",
    "psi",
    "big_psi",
    "lq_norm",
    "holder_conjugate",
    "v_norm",
    "matvec",
    "as_array",
]


@dataclass(frozen=True)
class SymMatrix:
    """Dense symmetric matrix with nonnegative entries.

    The entries are copied into a read-only float64 array on construction,
    so instances can be shared freely between threads.

    Parameters
    ----------
    entries : array-like of shape (n, n)
        Symmetric, nonnegative, finite.
    """

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = check_sym_matrix(self.entries, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def zero_diagonal(self):
        return bool(np.all(np.diag(self.entries) == 0.0))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __mul__(self, c):
        if not np.isscalar(c) or c < 0:
            return NotImplemented
        return SymMatrix(self.entries * float(c))

    __rmul__ = __mul__

    def degrees(self):
        """Row sums ``d(i) = sum_j a_ij``."""
        return self.entries.sum(axis=1)

    @classmethod
    def mean_matrix(cls, n, mu):
        """``mu * (J_n - I_n)``: the expected matrix of a zero-diagonal ensemble."""
        return cls(mu * (np.ones((n, n)) - np.eye(n)))

    @classmethod
    def ones(cls, n):
        return cls(np.ones((n, n)))

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))


def as_array(A):
    """Return the validated float64 array behind ``A`` without copying when possible."""
    if isinstance(A, SymMatrix):
        return A.entries
    return check_sym_matrix(A)


@dataclass(frozen=True)
class NormParams:
    """Exponent pair for the ``r -> p`` norm, with ``1 < p <= r < inf``."""

    r: float
    p: float

    def __post_init__(self):
        r, p = check_exponent_pair(self.r, self.p)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "p", p)

    @property
    def r_star(self):
        return holder_conjugate(self.r)

    @property
    def uniform_exponent(self):
        """``1/p - 1/r``; the norm of ``A`` grows like ``n`` to this power times ``n mu``."""
        return 1.0 / self.p - 1.0 / self.r


def psi(q, t):
    """Signed power ``|t|**(q-1) * sign(t)`` with ``sign(0) = 0``.

    Works elementwise on arrays; ``q = 1`` gives ``sign(t)``.
    """
    if q < 1:
        raise ValueError(f"psi requires q >= 1, got {q}")
    t = np.asarray(t, dtype=float)
    if q == 1:
        out = np.sign(t)
    elif q == 2:
        out = t.copy()
    else:
        out = np.sign(t) * np.abs(t) ** (q - 1.0)
    return out[()] if out.ndim == 0 else out


def big_psi(q, x):
    """Entrywise :func:`psi` on a vector."""
    return psi(q, check_vector(x))


def lq_norm(q, x):
    """``(sum |x_i|**q)**(1/q)`` with the max entry factored out first."""
    if q < 1:
        raise ValueError(f"lq_norm requires q >= 1, got {q}")
    x = np.abs(np.asarray(x, dtype=float))
    if x.size == 0:
        return 0.0
    m = x.max()
    if m == 0.0 or not np.isfinite(m):
        return float(m)
    if q == 1:
        return float(x.sum())
    if q == 2:
        return float(m * np.sqrt(np.dot(x / m, x / m)))
    return float(m * np.sum((x / m) ** q) ** (1.0 / q))


def holder_conjugate(r):
    """``r / (r - 1)``."""
    r = float(r)
    if not r > 1:
        raise ValueError(f"Hoelder conjugate requires r > 1, got {r}")
    return r / (r - 1.0)


def v_norm(v, x, r):
    """Weighted norm ``(sum v_i**(r-2) * x_i**2)**(1/2)`` for a positive ``v``."""
    v = check_vector(v)
    x = check_vector(x, n=v.shape[0])
    if np.any(v <= 0):
        raise ValueError("v_norm requires a vector with all entries > 0")
    return float(np.sqrt(np.sum(v ** (r - 2.0) * x * x)))


def matvec(A, x):
    """``A @ x`` with a dimension check."""
    arr = as_array(A)
    x = check_vector(x, n=arr.shape[0])
    return arr @ x
