"""Nonlinear power iteration for the ``r -> p`` norm of a nonnegative matrix.

For ``1 < p <= r`` the maximizer of ``||A x||_p / ||x||_r`` over nonnegative
``x`` is the unique positive fixed point of

    S x = Psi_{r*}(A^T Psi_p(A x)),    W x = S x / ||S x||_r,

whenever ``A^T A`` is irreducible. Iterating ``W`` from any positive start
converges to it. Inputs are symmetric, so ``A^T = A`` throughout.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_vector
from .core import NormParams, as_array, lq_norm, psi
from .diagnostics import irreducible
from .exceptions import ConvergenceError, DegenerateError, ReducibleError

__all__ = [
    "PowerOptions",
    "PowerResult",
    "apply_S",
    "apply_W",
    "apply_B",
    "fixed_point_residual",
    "iterate",
    "compute_norm",
    "uniform_start",
]


@dataclass(frozen=True)
class PowerOptions:
    """Stopping rule and starting vector for :func:`compute_norm`.

    ``start`` is either ``"uniform"`` (``n**(-1/r) * 1``) or a positive vector;
    it is rescaled to unit r-norm before the first step.
    """

    tol: float = 1e-10
    max_iter: int = 10000
    start: object = "uniform"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not (isinstance(self.start, str) and self.start == "uniform"):
            start = check_vector(self.start, name="start")
            if np.any(start <= 0) or not np.all(np.isfinite(start)):
                raise ValueError("start vector must have all entries > 0")
            object.__setattr__(self, "start", start)


@dataclass(frozen=True)
class PowerResult:
    """Converged norm ``gamma = ||A v||_p`` and its positive maximizer ``v``."""

    gamma: float
    v: np.ndarray = field(repr=False)
    iterations: int
    residual: float


def _check_params(params):
    if not isinstance(params, NormParams):
        raise TypeError(f"expected NormParams, got {type(params).__name__}")
    return params


def apply_S(A, params, x):
    """``Psi_{r*}(A^T Psi_p(A x))``."""
    params = _check_params(params)
    arr = as_array(A)
    x = check_vector(x, n=arr.shape[0])
    if not np.any(x):
        raise DegenerateError("S is undefined at the zero vector")
    return psi(params.r_star, arr @ psi(params.p, arr @ x))


def apply_W(A, params, x):
    """``S x`` rescaled to unit r-norm."""
    s = apply_S(A, params, x)
    norm = lq_norm(params.r, s)
    if norm == 0.0:
        raise DegenerateError("S x is the zero vector; A is degenerate on x")
    return s / norm


def fixed_point_residual(A, params, v):
    """Sup-norm defect of the fixed-point equation at ``v``.

    Returns ``||S v / g - v||_inf`` with ``g = ||A v||_p ** (p (r* - 1))``,
    i.e. the defect measured in units of ``v`` itself, which keeps the value
    independent of the scale of ``A``.
    """
    params = _check_params(params)
    arr = as_array(A)
    v = check_vector(v, n=arr.shape[0], name="v")
    av = arr @ v
    gamma = lq_norm(params.p, av)
    if gamma == 0.0:
        raise DegenerateError("A v = 0; the fixed-point equation is degenerate")
    s = psi(params.r_star, arr @ psi(params.p, av))
    eig = gamma ** (params.p * (params.r_star - 1.0))
    return float(np.max(np.abs(s / eig - v)))


def apply_B(A, params, v, x):
    """Linearization of ``S`` at the maximizer ``v``, applied to ``x``.

    ``B x = v**(2-r) * A^T(|A v|**(p-2) * (A x))``; self-adjoint in the
    inner product ``[x, y] = <v**(r-2) x, y>`` with top eigenpair
    ``(gamma**p, v)``.
    """
    params = _check_params(params)
    arr = as_array(A)
    v = check_vector(v, n=arr.shape[0], name="v")
    x = check_vector(x, n=arr.shape[0])
    if np.any(v <= 0):
        raise ValueError("apply_B requires a maximizer with all entries > 0")
    av = arr @ v
    if np.any(av <= 0):
        raise DegenerateError("A v has a zero entry; B is undefined")
    return v ** (2.0 - params.r) * (arr @ (av ** (params.p - 2.0) * (arr @ x)))


def uniform_start(n, r):
    return np.full(n, float(n) ** (-1.0 / r))


def _start_vector(n, params, opts):
    if isinstance(opts.start, str):
        return uniform_start(n, params.r)
    start = check_vector(opts.start, n=n, name="start")
    return start / lq_norm(params.r, start)


def iterate(A, params, start=None):
    """Yield ``(v_k, gamma_k, residual_k)`` for ``k = 0, 1, 2, ...`` indefinitely.

    ``v_0`` is ``start`` normalized to unit r-norm (uniform by default),
    ``gamma_k = ||A v_k||_p`` and ``residual_k`` is the fixed-point defect
    of ``v_k`` (see :func:`fixed_point_residual`).
    """
    params = _check_params(params)
    arr = as_array(A)
    n = arr.shape[0]
    if start is None:
        v = uniform_start(n, params.r)
    else:
        v = check_vector(start, n=n, name="start")
        v = v / lq_norm(params.r, v)
    eig_exp = params.p * (params.r_star - 1.0)
    while True:
        av = arr @ v
        gamma = lq_norm(params.p, av)
        if gamma == 0.0:
            raise DegenerateError("iterate v has A v = 0")
        s = psi(params.r_star, arr @ psi(params.p, av))
        residual = float(np.max(np.abs(s / gamma ** eig_exp - v)))
        yield v, gamma, residual
        norm = lq_norm(params.r, s)
        if norm == 0.0:
            raise DegenerateError("S v collapsed to the zero vector")
        v = s / norm


def _is_scaled_permutation(arr):
    gram = arr @ arr
    d = np.diag(gram)
    return d[0] > 0 and np.allclose(gram, d[0] * np.eye(arr.shape[0]),
                                    rtol=0.0, atol=1e-12 * d[0])


def compute_norm(A, params, opts=None, *, check=True):
    """Compute ``||A||_{r->p}`` and its positive maximizer.

    Stops when both the relative change of ``gamma`` between successive
    iterates and the fixed-point residual drop below ``opts.tol``.

    Raises
    ------
    ReducibleError
        ``A^T A`` is reducible (support graph disconnected or bipartite).
        Scaled permutation matrices (``A^T A = c I``) are exempt: their
        uniform vector is an exact maximizer and the iteration stops there.
    DegenerateError
        ``A`` is zero or an iterate collapses to zero.
    ConvergenceError
        ``max_iter`` reached above tolerance.
    """
    params = _check_params(params)
    opts = PowerOptions() if opts is None else opts
    arr = as_array(A)
    n = arr.shape[0]
    if not np.any(arr):
        raise DegenerateError("the zero matrix has no normalized maximizer")
    if check:
        ok, kind, witness = irreducible(arr)
        if not ok and not _is_scaled_permutation(arr):
            raise ReducibleError(
                f"A^T A is reducible: support graph is {kind}", kind, witness)

    start = _start_vector(n, params, opts)
    prev_gamma = None
    for k, (v, gamma, residual) in enumerate(iterate(arr, params, start)):
        change = np.inf if prev_gamma is None else abs(gamma - prev_gamma) / gamma
        if residual < opts.tol and (change < opts.tol or residual == 0.0):
            return PowerResult(gamma=gamma, v=v.copy(), iterations=k, residual=residual)
        if k >= opts.max_iter:
            raise ConvergenceError(
                f"no convergence after {k} iterations (residual {residual:.3e})",
                iterations=k, residual=residual)
        prev_gamma = gamma
