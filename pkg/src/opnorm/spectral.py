"""Second-order spectral quantities of the norm problem.

``Lambda_2`` is the largest singular value of ``A`` on the complement of the
all-ones vector. ``lambda_2`` is the second eigenvalue of the linearization
``B`` of the power map at the maximizer (see :func:`opnorm.boyd.apply_B`),
whose ratio to ``gamma**p`` sets the contraction rate of the iteration.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from ._validation import check_positive, check_vector
from .core import NormParams, as_array
from .diagnostics import _Report
from .exceptions import ConvergenceError, DegenerateError

__all__ = [
    "SpectralReport",
    "lambda_big2",
    "lambda2_B",
    "lambda_big2_bound",
    "lambda2_B_bound",
    "check_bounds",
]

GAP_WARNING_RTOL = 1e-6
# Relative slack in the bound comparisons, so equality cases survive rounding.
BOUND_RTOL = 1e-9
# Below this size lambda_2 comes from a dense eigensolve.
DENSE_MAX_N = 64


@dataclass(frozen=True)
class SpectralReport(_Report):
    """Spectral quantities and the two bounds that relate them.

    ``lambda2_B_bound_ok`` tests ``lambda_2 <= 2 mu**(p-2) n**(p(r-1)/r - 1) Lambda_2**2``;
    ``lambda_big2_bound_ok`` tests ``Lambda_2 <= 3 sqrt(n) sigma + mu`` (plus
    ``sqrt(2 n (zeta**2 + rho**2))`` when the diagonal is nonzero).
    """

    lambda_big2: float
    lambda2_B: float
    gamma_p: float
    contraction_ratio: float
    lambda2_B_bound: float
    lambda_big2_bound: float
    lambda2_B_bound_ok: bool
    lambda_big2_bound_ok: bool
    gap_warning: bool


def _start(n):
    # Fixed pseudo-random start so results are reproducible.
    rng = np.random.Generator(np.random.Philox(20240611))
    return rng.standard_normal(n)


def lambda_big2(A, tol=1e-10, max_iter=50000):
    """Largest singular value of ``A`` restricted to ``1^perp``.

    Power iteration on ``P A^T A P`` with the projection ``P`` reapplied at
    every step. Stops when the eigen-residual is below ``sqrt(tol)`` relative
    to the Rayleigh quotient, so the quotient itself is accurate to about
    ``tol`` relative.
    """
    arr = as_array(A)
    n = arr.shape[0]
    if n < 2:
        raise ValueError("lambda_big2 needs n >= 2")
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if not np.any(arr):
        return 0.0
    x = _start(n)
    x -= x.mean()
    x /= np.linalg.norm(x)
    rtol = math.sqrt(tol)
    theta = 0.0
    for _ in range(int(max_iter)):
        ax = arr @ x
        theta = float(ax @ ax)
        z = arr @ ax
        z -= z.mean()
        if theta == 0.0:
            return 0.0
        if np.linalg.norm(z - theta * x) <= rtol * theta:
            return math.sqrt(theta)
        x = z / np.linalg.norm(z)
    raise ConvergenceError(f"Lambda_2 power iteration did not converge in {max_iter} steps",
                           iterations=int(max_iter))


def lambda2_B(A, params, v, tol=1e-8, max_iter=50000, return_vector=False):
    """Second eigenvalue of ``B`` in the v-inner product.

    With ``D = diag(v**((r-2)/2))`` the matrix
    ``C = D^-1 A diag(|A v|**(p-2)) A D^-1`` is symmetric positive
    semidefinite, similar to ``B``, and has top eigenvector ``D v`` with
    eigenvalue ``gamma**p``. The largest eigenvalue of ``C`` with that
    vector deflated is ``lambda_2``; it is found by Lanczos (ARPACK) on the
    deflated operator, or a dense solve when ``n`` is small.

    With ``return_vector=True`` the eigenvector estimate is returned too, in
    the original coordinates, where it is v-orthogonal to ``v``.
    """
    if not isinstance(params, NormParams):
        raise TypeError(f"expected NormParams, got {type(params).__name__}")
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    arr = as_array(A)
    n = arr.shape[0]
    v = check_vector(v, n=n, name="v")
    if np.any(v <= 0):
        raise ValueError("lambda2_B requires a maximizer with all entries > 0")
    av = arr @ v
    if np.any(av <= 0):
        raise DegenerateError("A v has a zero entry; B is undefined")
    d = v ** ((params.r - 2.0) / 2.0)
    m = av ** (params.p - 2.0)
    u = d * v
    u /= np.linalg.norm(u)

    def deflated(x):
        x = np.ravel(x)
        x = x - (u @ x) * u
        z = (arr @ (m * (arr @ (x / d)))) / d
        return z - (u @ z) * u

    if n == 1:
        value, y = 0.0, np.zeros(1)
    elif n <= DENSE_MAX_N:
        C = np.column_stack([deflated(e) for e in np.eye(n)])
        vals, vecs = np.linalg.eigh((C + C.T) / 2.0)
        value, y = vals[-1], vecs[:, -1]
    else:
        op = LinearOperator((n, n), matvec=deflated, dtype=float)
        try:
            vals, vecs = eigsh(op, k=1, which="LA", tol=tol, maxiter=int(max_iter),
                               v0=deflated(_start(n)))
        except ArpackNoConvergence as exc:
            raise ConvergenceError(f"lambda_2 Lanczos iteration did not converge in "
                                   f"{max_iter} restarts", iterations=int(max_iter)) from exc
        value, y = vals[0], vecs[:, 0]
    value = max(float(value), 0.0)
    if not return_vector:
        return value
    y = y - (u @ y) * u
    return value, y / d


def lambda_big2_bound(n, mu, sigma2, diag_mean=0.0, diag_var=0.0, zero_diagonal=True):
    """``3 sqrt(n) sigma + mu``, plus ``sqrt(2 n (zeta**2 + rho**2))`` for a nonzero diagonal."""
    bound = 3.0 * math.sqrt(n * sigma2) + mu
    if not zero_diagonal:
        bound += math.sqrt(2.0 * n * (diag_mean ** 2 + diag_var))
    return bound


def lambda2_B_bound(n, mu, params, big2):
    """``2 mu**(p-2) n**(p(r-1)/r - 1) Lambda_2**2``."""
    r, p = params.r, params.p
    return 2.0 * mu ** (p - 2.0) * n ** (p * (r - 1.0) / r - 1.0) * big2 ** 2


def check_bounds(A, params, result, mu, sigma2, diag_mean=0.0, diag_var=0.0):
    """Evaluate ``Lambda_2``, ``lambda_2`` and both bounds for a converged result.

    The augmented ``Lambda_2`` bound is used whenever ``A`` has a nonzero
    diagonal; ``diag_mean`` and ``diag_var`` are then the diagonal law's mean
    and variance.
    """
    mu = check_positive(mu, "mu")
    if sigma2 < 0 or diag_var < 0:
        raise ValueError("variances must be >= 0")
    arr = as_array(A)
    n = arr.shape[0]
    big2 = lambda_big2(arr)
    lam2 = lambda2_B(arr, params, result.v)
    gamma_p = result.gamma ** params.p
    zero_diag = bool(np.all(np.diag(arr) == 0.0))
    big_bound = lambda_big2_bound(n, mu, sigma2, diag_mean, diag_var, zero_diagonal=zero_diag)
    small_bound = lambda2_B_bound(n, mu, params, big2)
    return SpectralReport(
        lambda_big2=big2,
        lambda2_B=lam2,
        gamma_p=gamma_p,
        contraction_ratio=(params.p - 1.0) * lam2 / ((params.r - 1.0) * gamma_p),
        lambda2_B_bound=small_bound,
        lambda_big2_bound=big_bound,
        lambda2_B_bound_ok=lam2 <= small_bound * (1.0 + BOUND_RTOL),
        lambda_big2_bound_ok=big2 <= big_bound * (1.0 + BOUND_RTOL),
        gap_warning=lam2 >= (1.0 - GAP_WARNING_RTOL) * gamma_p,
    )
