"""Seeded random symmetric nonnegative matrix ensembles.

Every family is parameterized by its entry mean ``mu`` and variance
``sigma2``:

==================  ===========================================================
``er``              Bernoulli(mu); ``sigma2 = mu (1 - mu)``
``bernoulli_scaled`` ``b * Bernoulli(q)`` with ``b q = mu``, ``b^2 q (1-q) = sigma2``
``uniform``         Uniform[mu - sqrt(3 sigma2), mu + sqrt(3 sigma2)], lower end >= 0
``exponential``     Exp(mean mu); ``sigma2 = mu^2``
``custom_iid``      finite ``support`` / ``probs`` table
==================  ===========================================================

Random streams
--------------
Draws come from numpy's ``Philox`` counter-based generator keyed by
``SeedSequence(seed, spawn_key=(replicate, attempt))``. The upper triangle is
filled row-major from that stream and the diagonal from the child key
``(replicate, attempt, 1)``, so a matrix depends only on
``(seed, replicate, attempt)`` and never on scheduling. Streams are stable for
a fixed numpy version; :data:`RNG_DESCRIPTION` records the one in use.
Sub-Gaussian tails are not checked; ``custom_iid`` tables are the caller's
responsibility.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from ._validation import check_positive, check_sym_matrix
from .core import SymMatrix, as_array

__all__ = [
    "FAMILIES",
    "DiagonalLaw",
    "EnsembleSpec",
    "RNG_DESCRIPTION",
    "generator",
    "replicate_seed",
    "sample",
    "draw_entries",
    "center",
    "epsilon_n",
]

FAMILIES = ("er", "bernoulli_scaled", "uniform", "exponential", "custom_iid")
RNG_DESCRIPTION = f"numpy-{np.__version__} Philox4x32-10 via SeedSequence(seed, spawn_key)"

_REL_TOL = 1e-9


def _family_moments(family, mu, sigma2, support=None, probs=None):
    """Validate ``(mu, sigma2)`` against ``family``; return the resolved ``sigma2``."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if family == "custom_iid":
        support, probs = _check_table(support, probs)
        t_mu = float(np.dot(support, probs))
        t_var = float(np.dot((support - t_mu) ** 2, probs))
        if mu is not None and not math.isclose(mu, t_mu, rel_tol=_REL_TOL):
            raise ValueError(f"custom_iid table has mean {t_mu}, spec says mu={mu}")
        if sigma2 is not None and not math.isclose(sigma2, t_var, rel_tol=_REL_TOL, abs_tol=1e-15):
            raise ValueError(f"custom_iid table has variance {t_var}, spec says sigma2={sigma2}")
        return t_mu, t_var
    mu = check_positive(mu, "mu")
    if family == "er":
        if not mu < 1:
            raise ValueError(f"er requires 0 < mu < 1, got mu={mu}")
        implied = mu * (1.0 - mu)
    elif family == "exponential":
        implied = mu * mu
    else:
        if sigma2 is None:
            raise ValueError(f"family {family!r} requires sigma2")
        sigma2 = float(sigma2)
        if sigma2 < 0:
            raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
        if family == "uniform" and mu - math.sqrt(3.0 * sigma2) < 0:
            raise ValueError("uniform family would have a negative lower end; "
                             "need sigma2 <= mu^2 / 3")
        return mu, sigma2
    if sigma2 is not None and not math.isclose(float(sigma2), implied, rel_tol=_REL_TOL):
        raise ValueError(f"family {family!r} with mu={mu} has sigma2={implied}, got {sigma2}")
    return mu, implied


def _check_table(support, probs):
    if support is None or probs is None:
        raise ValueError("custom_iid requires both support and probs")
    support = np.asarray(support, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if support.ndim != 1 or support.shape != probs.shape or support.size == 0:
        raise ValueError("support and probs must be 1-d arrays of equal length")
    if np.any(support < 0):
        raise ValueError("custom_iid support must be nonnegative")
    if np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, rel_tol=1e-12):
        raise ValueError("custom_iid probs must be nonnegative and sum to 1")
    return support, probs


@dataclass(frozen=True)
class DiagonalLaw:
    """Law of the i.i.d. diagonal entries: mean ``zeta``, variance ``rho2``."""

    zeta: float
    rho2: float
    family: str = "exponential"

    def __post_init__(self):
        if self.family == "custom_iid":
            raise ValueError("diagonal laws support er, bernoulli_scaled, uniform, exponential")
        _, rho2 = _family_moments(self.family, self.zeta, self.rho2)
        object.__setattr__(self, "zeta", float(self.zeta))
        object.__setattr__(self, "rho2", rho2)


@dataclass(frozen=True)
class EnsembleSpec:
    """Distribution of a random symmetric matrix.

    ``sigma2`` may be omitted for families where it is implied by ``mu``.
    ``profile`` is an optional symmetric ``n x n`` grid of standard-deviation
    multipliers: entry ``(i, j)`` then has variance ``profile[i, j]**2 * sigma2``
    (only the ``uniform`` and ``bernoulli_scaled`` families can vary their
    variance at fixed mean).
    """

    family: str
    n: int
    mu: Optional[float] = None
    sigma2: Optional[float] = None
    seed: int = 0
    profile: Optional[np.ndarray] = field(default=None, repr=False)
    diagonal: Optional[DiagonalLaw] = None
    support: Optional[tuple] = None
    probs: Optional[tuple] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed}")
        mu, sigma2 = _family_moments(self.family, self.mu, self.sigma2,
                                     self.support, self.probs)
        object.__setattr__(self, "mu", float(mu))
        object.__setattr__(self, "sigma2", float(sigma2))
        if self.support is not None:
            object.__setattr__(self, "support", tuple(float(s) for s in self.support))
            object.__setattr__(self, "probs", tuple(float(q) for q in self.probs))
        if self.profile is not None:
            if self.family not in ("uniform", "bernoulli_scaled"):
                raise ValueError("a variance profile needs the uniform or bernoulli_scaled family")
            prof = check_sym_matrix(self.profile, copy=True)
            if prof.shape[0] != self.n:
                raise ValueError(f"profile has shape {prof.shape}, expected n={self.n}")
            off = prof[~np.eye(self.n, dtype=bool)]
            if off.size and off.min() <= 0:
                raise ValueError("profile multipliers must be > 0 off the diagonal")
            if self.family == "uniform" and off.size and \
                    self.mu - math.sqrt(3.0 * self.sigma2) * off.max() < 0:
                raise ValueError("profile makes the uniform lower end negative")
            prof.setflags(write=False)
            object.__setattr__(self, "profile", prof)
        if self.diagonal is not None and not isinstance(self.diagonal, DiagonalLaw):
            object.__setattr__(self, "diagonal", DiagonalLaw(**self.diagonal))

    @property
    def zero_diagonal(self):
        return self.diagonal is None

    def sigma2_sum(self):
        """``sum_{i<j} sigma^2(i, j)``."""
        n = self.n
        if self.profile is None:
            return n * (n - 1) / 2.0 * self.sigma2
        iu = np.triu_indices(n, k=1)
        return float(np.sum(self.profile[iu] ** 2) * self.sigma2)


def generator(seed, *key):
    """Philox generator for the stream ``(seed, *key)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def replicate_seed(seed, replicate, attempt=0):
    """64-bit word identifying the stream of one replicate (for logs and CSVs)."""
    ss = np.random.SeedSequence(seed, spawn_key=(replicate, attempt))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def draw_entries(rng, family, mu, sigma2, size, support=None, probs=None):
    """Draw ``size`` independent entries with mean ``mu`` and variance ``sigma2``.

    ``sigma2`` may be an array broadcastable to ``size`` for the families that
    allow it.
    """
    if family == "er":
        return (rng.random(size) < mu).astype(float)
    if family == "exponential":
        return rng.exponential(mu, size)
    if family == "uniform":
        half = np.sqrt(3.0 * np.asarray(sigma2, dtype=float))
        return mu + half * (2.0 * rng.random(size) - 1.0)
    if family == "bernoulli_scaled":
        sigma2 = np.asarray(sigma2, dtype=float)
        b = (sigma2 + mu * mu) / mu
        q = mu / b
        return b * (rng.random(size) < q)
    if family == "custom_iid":
        support, probs = _check_table(support, probs)
        return support[rng.choice(support.size, size=size, p=probs)]
    raise ValueError(f"unknown family {family!r}")


@lru_cache(maxsize=8)
def _triu(n):
    return np.triu_indices(n, k=1)


def sample(spec, replicate=0, attempt=0):
    """Draw one matrix; a deterministic function of ``(spec, replicate, attempt)``."""
    n = spec.n
    iu = _triu(n)
    rng = generator(spec.seed, replicate, attempt)
    var = spec.sigma2 if spec.profile is None else spec.profile[iu] ** 2 * spec.sigma2
    vals = draw_entries(rng, spec.family, spec.mu, var, iu[0].size,
                        spec.support, spec.probs)
    A = np.zeros((n, n))
    A[iu] = vals
    A += A.T
    if spec.diagonal is not None:
        d = spec.diagonal
        drng = generator(spec.seed, replicate, attempt, 1)
        A[np.diag_indices(n)] = draw_entries(drng, d.family, d.zeta, d.rho2, n)
    return SymMatrix(A)


def center(A, mu):
    """``A - mu J + mu I`` as a plain array (entries may be negative)."""
    mu = check_positive(mu, "mu")
    arr = as_array(A)
    n = arr.shape[0]
    return arr - mu * np.ones((n, n)) + mu * np.eye(n)


def epsilon_n(n, mu, K=1.0):
    """``sqrt(5 K log(n) / (n mu))`` with the natural logarithm."""
    if n < 2:
        raise ValueError(f"epsilon_n needs n >= 2, got {n}")
    mu = check_positive(mu, "mu")
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return math.sqrt(5.0 * K * math.log(n) / (n * mu))
