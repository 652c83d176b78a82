"""Independent maximizers of ``||A x||_p / ||x||_r`` for small matrices.

None of these routines use the power iteration. They exist to check it.

* :func:`maximize_grid` searches the nonnegative part of the unit r-sphere
  exhaustively (``n <= 3``) and then zooms in on the best cell;
* :func:`maximize_multistart` runs gradient ascent on the sphere from random
  positive starts (``n <= 12``);
* :func:`maximize_quadratic_form` does the same for ``x^T A x / ||x||_r^2``;
* :func:`analytic_norm` returns closed forms for permutation-type and mean
  matrices.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import NormParams, as_array, lq_norm, psi
from .exceptions import ConvergenceError

__all__ = [
    "OracleResult",
    "maximize_grid",
    "maximize_multistart",
    "maximize_bruteforce",
    "maximize_quadratic_form",
    "analytic_norm",
]

GRID_MAX_N = 3
MULTISTART_MAX_N = 12
_ZOOM_POINTS = 41


@dataclass(frozen=True)
class OracleResult:
    value: float
    argmax: np.ndarray = field(repr=False)
    method: str


def _row_norms(q, Y):
    m = np.abs(Y).max(axis=1)
    safe = np.where(m > 0, m, 1.0)
    return m * np.sum((np.abs(Y) / safe[:, None]) ** q, axis=1) ** (1.0 / q)


def _best(X, vals):
    """Row of ``X`` with the largest value; ties go to the lexicographically smallest row."""
    top = vals.max()
    idx = np.flatnonzero(vals == top)
    if idx.size > 1:
        idx = idx[np.lexsort(X[idx].T[::-1])]
    return X[idx[0]], float(top)


def _grid_eval(arr, params, W):
    X = W ** (1.0 / params.r)
    return X, _row_norms(params.p, X @ arr)


def _simplex_points(lo, hi, count, n):
    """Points of the simplex whose first ``n-1`` coordinates lie on a box grid."""
    axes = [np.linspace(lo[k], hi[k], count) for k in range(n - 1)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n - 1)
    last = 1.0 - mesh.sum(axis=1)
    keep = last >= -1e-12
    return np.column_stack([mesh[keep], np.maximum(last[keep], 0.0)])


def maximize_grid(A, params, resolution=1000):
    """Grid search over ``x = w**(1/r)`` with ``w`` on the probability simplex.

    The simplex is sampled with spacing ``1/resolution`` (about
    ``resolution**(n-1)`` points), then the best point is polished by a
    sequence of finer local grids around it.
    """
    arr = as_array(A)
    n = arr.shape[0]
    if n > GRID_MAX_N:
        raise ValueError(f"maximize_grid supports n <= {GRID_MAX_N}, got n={n}")
    resolution = int(resolution)
    if resolution < 10:
        raise ValueError(f"resolution must be >= 10, got {resolution}")
    if n == 1:
        return OracleResult(value=float(abs(arr[0, 0])), argmax=np.ones(1), method="grid")

    ticks = np.arange(resolution + 1) / resolution
    best_x, best_val, best_w = None, -np.inf, None
    if n == 2:
        chunks = [np.column_stack([ticks, 1.0 - ticks])]
    else:
        chunks = (np.column_stack([np.full(resolution + 1 - i, t), ticks[: resolution + 1 - i],
                                   1.0 - t - ticks[: resolution + 1 - i]])
                  for i, t in enumerate(ticks))
    for W in chunks:
        W = np.clip(W, 0.0, 1.0)
        X, vals = _grid_eval(arr, params, W)
        x, val = _best(X, vals)
        if val > best_val or (val == best_val and tuple(x) < tuple(best_x)):
            best_x, best_val = x, val
            best_w = W[np.flatnonzero((X == x).all(axis=1))[0]]

    step = 1.0 / resolution
    while step > 1e-15:
        lo = np.clip(best_w[:-1] - 2.0 * step, 0.0, 1.0)
        hi = np.clip(best_w[:-1] + 2.0 * step, 0.0, 1.0)
        W = np.clip(_simplex_points(lo, hi, _ZOOM_POINTS, n), 0.0, 1.0)
        X, vals = _grid_eval(arr, params, W)
        x, val = _best(X, vals)
        if val > best_val:
            best_x, best_val = x, val
            best_w = W[np.flatnonzero((X == x).all(axis=1))[0]]
        step /= 10.0
    x = best_x / lq_norm(params.r, best_x)
    return OracleResult(value=lq_norm(params.p, arr @ x), argmax=x, method="grid")


def _ascend(f, grad, x, r, tol, max_iter):
    """Backtracking gradient ascent of a scale-invariant ``f`` on the unit r-sphere.

    Returns ``(x, f(x), converged)``. Each step tries ``t = 1, 1/2, 1/4, ...``
    and accepts the first Armijo increase. Close to the optimum the increase
    drops below the rounding level of ``f``; a step is then accepted when it
    shrinks the gradient instead.
    """
    fx = f(x)
    g = grad(x, fx)
    gnorm = float(np.max(np.abs(g)))
    for _ in range(int(max_iter)):
        if gnorm < tol:
            return x, fx, True
        gg = float(g @ g)
        t = 1.0
        while True:
            y = x + t * g
            ny = lq_norm(r, y)
            if ny > 0:
                y = y / ny
                fy = f(y)
                noise = 8 * np.finfo(float).eps * abs(fx)
                if fy - fx > noise and fy - fx >= 1e-4 * t * gg:
                    gy = grad(y, fy)
                    break
                if abs(fy - fx) <= noise:
                    gy = grad(y, fy)
                    if np.max(np.abs(gy)) < gnorm:
                        break
            t *= 0.5
            if t < 1e-20:
                # Neither f nor the gradient can be improved in floating point.
                return x, fx, gnorm < 1e-7 * max(1.0, abs(fx))
        x, fx, g = y, fy, gy
        gnorm = float(np.max(np.abs(g)))
    return x, fx, False


def _random_starts(n, starts, seed):
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.uniform(0.05, 1.0, size=(int(starts), n))


def maximize_multistart(A, params, starts=20, tol=1e-10, seed=0, max_iter=20000):
    """Gradient ascent of ``||A x||_p / ||x||_r`` from ``starts`` random positive vectors.

    Stops each run when the sup norm of the gradient on the sphere falls
    below ``tol``. The best converged run wins.
    """
    if not isinstance(params, NormParams):
        raise TypeError(f"expected NormParams, got {type(params).__name__}")
    arr = as_array(A)
    n = arr.shape[0]
    if n > MULTISTART_MAX_N:
        raise ValueError(f"maximize_multistart supports n <= {MULTISTART_MAX_N}, got n={n}")
    if int(starts) < 1:
        raise ValueError(f"starts must be >= 1, got {starts}")
    r, p = params.r, params.p

    def f(x):
        return lq_norm(p, arr @ x)

    def grad(x, fx):
        if fx == 0.0:
            return np.zeros_like(x)
        return fx ** (1.0 - p) * (arr @ psi(p, arr @ x)) - fx * psi(r, x)

    return _multistart(arr, f, grad, r, starts, tol, seed, max_iter,
                       lambda x: lq_norm(p, arr @ x))


def maximize_quadratic_form(A, r, starts=20, tol=1e-10, seed=0, max_iter=20000):
    """Gradient ascent of ``x^T A x`` over the unit r-sphere, ``r >= 2``."""
    if not r >= 2:
        raise ValueError(f"r must be >= 2, got {r}")
    arr = as_array(A)
    n = arr.shape[0]
    if n > MULTISTART_MAX_N:
        raise ValueError(f"maximize_quadratic_form supports n <= {MULTISTART_MAX_N}, got n={n}")

    def f(x):
        return float(x @ arr @ x)

    def grad(x, fx):
        return 2.0 * (arr @ x) - 2.0 * fx * psi(r, x)

    return _multistart(arr, f, grad, r, starts, tol, seed, max_iter,
                       lambda x: float(x @ arr @ x))


def _multistart(arr, f, grad, r, starts, tol, seed, max_iter, value_of):
    best = None
    for x0 in _random_starts(arr.shape[0], starts, seed):
        x, fx, ok = _ascend(f, grad, x0 / lq_norm(r, x0), r, tol, max_iter)
        if ok and (best is None or fx > best[1]):
            best = (x, fx)
    if best is None:
        raise ConvergenceError(f"no gradient-ascent start converged (tol={tol})")
    # For nonnegative A, |x| is at least as good as x.
    x = np.abs(best[0])
    x /= lq_norm(r, x)
    return OracleResult(value=value_of(x), argmax=x, method="multistart_gradient")


def maximize_bruteforce(A, params, resolution=1000, starts=20):
    """Best of :func:`maximize_grid` (when ``n <= 3``) and :func:`maximize_multistart`."""
    arr = as_array(A)
    results = [maximize_multistart(arr, params, starts=starts)]
    if arr.shape[0] <= GRID_MAX_N:
        results.append(maximize_grid(arr, params, resolution))
    return max(results, key=lambda res: res.value)


def analytic_norm(kind, n, mu=1.0, params=None):
    """Closed-form norms.

    ``perm``: ``mu * n**(1/p - 1/r)`` for ``mu`` times a symmetric
    permutation matrix. ``mean_matrix``: ``mu (n-1) n**(1/p - 1/r)`` for
    ``mu (J_n - I_n)``, attained at the uniform vector.
    """
    if not isinstance(params, NormParams):
        raise TypeError("analytic_norm needs NormParams")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    scale = float(n) ** params.uniform_exponent
    if kind == "perm":
        return mu * scale
    if kind == "mean_matrix":
        return mu * (n - 1) * scale
    raise ValueError(f"kind must be 'perm' or 'mean_matrix', got {kind!r}")
