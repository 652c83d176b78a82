"""Centering constants, the one-step approximation and the Monte Carlo harness.

For a random symmetric matrix with off-diagonal mean ``mu`` and variance
``sigma2``, the rescaled norm ``n**-(1/p - 1/r) * gamma`` fluctuates on the
scale ``sigma`` around

    alpha_n = (n - 1) mu + zeta + (p - 1 + 1/(r - 1)) sigma2 / (2 mu),

and ``(n**-(1/p - 1/r) gamma - alpha_n) / sigma`` is asymptotically
Normal(0, 2). :func:`run_clt_experiment` checks this by simulation.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.stats

from ._validation import check_positive
from .boyd import PowerOptions, PowerResult, compute_norm
from .core import NormParams, as_array, lq_norm, psi
from .diagnostics import irreducible
from .ensembles import replicate_seed, sample
from .exceptions import DegenerateError, InstabilityError, ReducibleError
from .spectral import lambda_big2

__all__ = [
    "CSV_COLUMNS",
    "CltSummary",
    "DerivCheckReport",
    "alpha_n",
    "alpha_n_inhom",
    "eta",
    "eta_gap_scale",
    "clt_statistic",
    "run_clt_experiment",
    "derivative_check",
    "grothendieck_mr",
    "default_workers",
]

CSV_COLUMNS = ("replicate", "seed", "n", "r", "p", "mu", "sigma2", "gamma_scaled",
               "alpha_n", "statistic", "eta_gap", "linf_dist", "lambda_big2", "irreducible")
MAX_RESAMPLES = 3
RICHARDSON_RTOL = 0.10


def _shift_coefficient(params):
    return params.p - 1.0 + 1.0 / (params.r - 1.0)


def alpha_n(n, mu, sigma2, params, zeta=0.0):
    """``(n-1) mu + zeta + (p - 1 + 1/(r-1)) sigma2 / (2 mu)``."""
    mu = check_positive(mu, "mu")
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    return (n - 1) * mu + zeta + _shift_coefficient(params) * sigma2 / (2.0 * mu)


def alpha_n_inhom(n, mu, sigma2_sum, params):
    """``(n-1) mu + (p - 1 + 1/(r-1)) sigma2_sum / (n**2 mu)`` for a variance profile."""
    mu = check_positive(mu, "mu")
    if sigma2_sum < 0:
        raise ValueError(f"sigma2_sum must be >= 0, got {sigma2_sum}")
    return (n - 1) * mu + _shift_coefficient(params) * sigma2_sum / (n * n * mu)


def eta(A, params):
    """One power step from the all-ones vector: ``||A S 1||_p / ||S 1||_r``."""
    arr = as_array(A)
    s = psi(params.r_star, arr @ psi(params.p, arr @ np.ones(arr.shape[0])))
    norm = lq_norm(params.r, s)
    if norm == 0.0:
        raise DegenerateError("S 1 is the zero vector")
    return lq_norm(params.p, arr @ s) / norm


def eta_gap_scale(n, mu, sigma2, params):
    """``sigma n**(1/p - 1/r) (sigma2 / mu) sqrt(log n / (n mu))``.

    ``|gamma - eta|`` divided by this is bounded in ``n`` for dense ensembles.
    """
    mu = check_positive(mu, "mu")
    return (math.sqrt(sigma2) * n ** params.uniform_exponent * (sigma2 / mu)
            * math.sqrt(math.log(n) / (n * mu)))


def clt_statistic(A, params, mu, sigma2=None, mode="hom", sigma2_sum=None, zeta=0.0,
                  gamma=None, opts=None):
    """Centered and scaled norm.

    ``hom``: ``(n**-(1/p-1/r) gamma - alpha_n) / sigma``.
    ``inhom``: ``n / sqrt(2 sigma2_sum) * (n**-(1/p-1/r) gamma - alpha_n_inhom)``,
    which reduces to the ``hom`` scaling when every entry has variance ``sigma2``.

    ``gamma`` may be a precomputed norm or :class:`PowerResult`; otherwise the
    norm is computed with ``opts``.
    """
    mu = check_positive(mu, "mu") if mu is not None and mu > 0 else None
    arr = as_array(A)
    n = arr.shape[0]
    if mode == "hom":
        if mu is None or sigma2 is None or not sigma2 > 0:
            raise ValueError("mu <= 0 or sigma 0: the statistic is undefined")
        centering = alpha_n(n, mu, sigma2, params, zeta)
        scaling = 1.0 / math.sqrt(sigma2)
    elif mode == "inhom":
        if mu is None or sigma2_sum is None or not sigma2_sum > 0:
            raise ValueError("mu <= 0 or sigma2_sum 0: the statistic is undefined")
        centering = alpha_n_inhom(n, mu, sigma2_sum, params) + zeta
        scaling = n / math.sqrt(2.0 * sigma2_sum)
    else:
        raise ValueError(f"mode must be 'hom' or 'inhom', got {mode!r}")
    if gamma is None:
        gamma = compute_norm(arr, params, opts).gamma
    elif isinstance(gamma, PowerResult):
        gamma = gamma.gamma
    return scaling * (n ** -params.uniform_exponent * gamma - centering)


@dataclass(frozen=True)
class CltSummary:
    """Per-replicate statistics of a Monte Carlo run and their summary.

    ``records`` holds one dict per replicate keyed by :data:`CSV_COLUMNS`;
    ``gammas`` and ``etas`` are the raw norms and one-step approximations.
    ``resamples`` counts replicates that had to be redrawn because their
    matrix was reducible.
    """

    replicates: int
    samples: np.ndarray = field(repr=False)
    mean: float
    variance: float
    ks_distance: float
    ks_pvalue: float
    centering: float
    scaling: float
    gammas: np.ndarray = field(repr=False, default=None)
    etas: np.ndarray = field(repr=False, default=None)
    records: tuple = field(repr=False, default=())
    resamples: int = 0

    @property
    def gamma_scaled(self):
        return np.array([rec["gamma_scaled"] for rec in self.records])

    def to_dict(self):
        return {
            "replicates": self.replicates,
            "mean": self.mean,
            "variance": self.variance,
            "ks_distance": self.ks_distance,
            "ks_pvalue": self.ks_pvalue,
            "centering": self.centering,
            "scaling": self.scaling,
            "resamples": self.resamples,
            "samples": [float(x) for x in self.samples],
        }


def default_workers():
    """Worker count: ``OPNORM_THREADS`` if set, else the CPU count."""
    env = os.environ.get("OPNORM_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"OPNORM_THREADS must be a positive integer, got {env!r}") from None
        if value < 1:
            raise ValueError(f"OPNORM_THREADS must be a positive integer, got {env!r}")
        return value
    return os.cpu_count() or 1


def _one_replicate(spec, params, index, mode, opts, extras):
    for attempt in range(MAX_RESAMPLES + 1):
        A = sample(spec, index, attempt)
        if irreducible(A).ok:
            break
    else:
        raise ReducibleError(
            f"replicate {index}: matrix reducible after {MAX_RESAMPLES} resamples",
            "resample_exhausted", (index,))
    arr = A.entries
    n = spec.n
    result = compute_norm(arr, params, opts, check=False)
    zeta = 0.0 if spec.diagonal is None else spec.diagonal.zeta
    if mode == "hom":
        stat = clt_statistic(arr, params, spec.mu, spec.sigma2, "hom", zeta=zeta, gamma=result)
        centering = alpha_n(n, spec.mu, spec.sigma2, params, zeta)
    else:
        s2sum = spec.sigma2_sum()
        stat = clt_statistic(arr, params, spec.mu, mode="inhom", sigma2_sum=s2sum,
                             zeta=zeta, gamma=result)
        centering = alpha_n_inhom(n, spec.mu, s2sum, params) + zeta
    eta_value = eta(arr, params)
    record = {
        "replicate": index,
        "seed": replicate_seed(spec.seed, index, attempt),
        "n": n,
        "r": params.r,
        "p": params.p,
        "mu": spec.mu,
        "sigma2": spec.sigma2,
        "gamma_scaled": n ** -params.uniform_exponent * result.gamma,
        "alpha_n": centering,
        "statistic": stat,
        "eta_gap": abs(result.gamma - eta_value),
        "linf_dist": float(np.max(np.abs(result.v - n ** (-1.0 / params.r)))) if extras else None,
        "lambda_big2": lambda_big2(arr, tol=1e-8) if extras and n >= 2 else None,
        "irreducible": True,
    }
    return record, result.gamma, eta_value, attempt


def run_clt_experiment(spec, params, replicates, mode="hom", opts=None, workers=None,
                       extras=True):
    """Simulate ``replicates`` matrices from ``spec`` and summarize the statistic.

    Replicate ``k`` uses the random stream keyed by ``(spec.seed, k)``, so
    results do not depend on ``workers``. A reducible draw is redrawn from
    the stream ``(spec.seed, k, attempt)`` up to three times before the run
    fails with :class:`ReducibleError`. ``extras=False`` skips the per-replicate
    ``linf_dist`` and ``lambda_big2`` columns.

    The KS test is against Normal(0, 2) with the asymptotic p-value; it is
    meaningful for roughly 200 or more replicates.
    """
    if not isinstance(params, NormParams):
        raise TypeError(f"expected NormParams, got {type(params).__name__}")
    if int(replicates) != replicates or replicates < 2:
        raise ValueError(f"replicates must be an integer >= 2, got {replicates}")
    if mode not in ("hom", "inhom"):
        raise ValueError(f"mode must be 'hom' or 'inhom', got {mode!r}")
    if mode == "hom" and not spec.sigma2 > 0:
        raise ValueError("mu <= 0 or sigma 0: the statistic is undefined")
    opts = PowerOptions() if opts is None else opts
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")

    def job(k):
        return _one_replicate(spec, params, k, mode, opts, extras)

    indices = range(int(replicates))
    if workers == 1:
        outcomes = [job(k) for k in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(job, indices))

    records = tuple(o[0] for o in outcomes)
    samples = np.array([rec["statistic"] for rec in records])
    ks = scipy.stats.kstest(samples, "norm", args=(0.0, math.sqrt(2.0)), method="asymp")
    n = spec.n
    if mode == "hom":
        zeta = 0.0 if spec.diagonal is None else spec.diagonal.zeta
        centering = alpha_n(n, spec.mu, spec.sigma2, params, zeta)
        scaling = 1.0 / math.sqrt(spec.sigma2)
    else:
        centering = records[0]["alpha_n"]
        scaling = n / math.sqrt(2.0 * spec.sigma2_sum())
    return CltSummary(
        replicates=int(replicates),
        samples=samples,
        mean=float(samples.mean()),
        variance=float(samples.var(ddof=1)),
        ks_distance=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        centering=centering,
        scaling=scaling,
        gammas=np.array([o[1] for o in outcomes]),
        etas=np.array([o[2] for o in outcomes]),
        records=records,
        resamples=int(sum(o[3] for o in outcomes)),
    )


@dataclass(frozen=True)
class DerivCheckReport:
    grad_fd: float
    grad_theory: float
    hess_diag_fd: float
    hess_diag_theory: float
    rel_err_grad: float
    rel_err_hess: float


def _eta_perturbed(base, params, i, j, t):
    arr = base.copy()
    arr[i, j] += t
    arr[j, i] += t
    return eta(arr, params)


def derivative_check(n, mu, params, h=1e-4, hess_h=None, coord=(0, 1)):
    """Finite differences of ``eta`` at ``mu (J_n - I_n)`` in one off-diagonal coordinate.

    The coordinate ``(i, j)`` and its mirror ``(j, i)`` move together. The
    gradient uses a central difference with step ``h``; the second
    derivative uses step ``hess_h`` (default ``100 h``), since a three-point
    second difference at ``h = 1e-4`` is dominated by rounding. Each estimate
    is recomputed at half its step, and a relative disagreement above 10%
    raises :class:`InstabilityError`.

    Theory: gradient ``2 n**(1/p-1/r-1)``, second derivative
    ``2 (p - 1 + 1/(r-1)) n**(1/p-1/r-1) / (n mu)``.
    """
    if int(n) != n or n < 3:
        raise ValueError(f"n must be an integer >= 3, got {n}")
    mu = check_positive(mu, "mu")
    h = check_positive(h, "h")
    hess_h = 100.0 * h if hess_h is None else check_positive(hess_h, "hess_h")
    i, j = coord
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"coord must be an off-diagonal index pair, got {coord}")
    base = mu * (np.ones((n, n)) - np.eye(n))
    e0 = eta(base, params)

    def grad(step):
        return (_eta_perturbed(base, params, i, j, step)
                - _eta_perturbed(base, params, i, j, -step)) / (2.0 * step)

    def hess(step):
        return (_eta_perturbed(base, params, i, j, step) - 2.0 * e0
                + _eta_perturbed(base, params, i, j, -step)) / (step * step)

    g, g_half = grad(h), grad(h / 2.0)
    H, H_half = hess(hess_h), hess(hess_h / 2.0)
    for name, full, half in (("gradient", g, g_half), ("second derivative", H, H_half)):
        if abs(full - half) > RICHARDSON_RTOL * abs(half):
            raise InstabilityError(
                f"{name} estimate changes by more than 10% when the step is halved "
                f"({full!r} vs {half!r}); choose a different step")
    expo = params.uniform_exponent - 1.0
    g_th = 2.0 * n ** expo
    H_th = 2.0 * _shift_coefficient(params) * n ** expo / (n * mu)
    return DerivCheckReport(
        grad_fd=g,
        grad_theory=g_th,
        hess_diag_fd=H,
        hess_diag_theory=H_th,
        rel_err_grad=abs(g - g_th) / abs(g_th),
        rel_err_hess=abs(H - H_th) / abs(H_th),
    )


def grothendieck_mr(A, r, opts=None):
    """``M_r(A) = max x^T A x`` over the unit r-ball, computed as ``||A||_{r -> r*}``.

    Requires ``r >= 2``.
    """
    if not r >= 2:
        raise ValueError(f"r must be >= 2, got {r}")
    params = NormParams(r, r / (r - 1.0))
    return compute_norm(A, params, opts).gamma
