"""Structural checks on a nonnegative matrix and on its norm maximizer.

* irreducibility of ``A^T A`` via its support graph (connected and
  non-bipartite, a self-loop counting as an odd cycle);
* almost regularity: every row sum within ``n mu eps`` of ``n mu``;
* well-balancedness, exhaustively for ``n <= 15`` and by sampling otherwise;
* the sup-norm distance of the maximizer from ``n**(-1/r) * 1`` against the
  large-``n`` bound.
"""

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.sparse
from scipy.sparse.csgraph import connected_components

from ._validation import check_positive
from .core import as_array

__all__ = [
    "Irreducibility",
    "RegularityReport",
    "MaximizerReport",
    "degree",
    "irreducible",
    "almost_regular",
    "default_delta",
    "subset_violations",
    "well_balanced_sampled",
    "maximizer_bound",
    "estimate_K",
]

EXHAUSTIVE_MAX_N = 15


class Irreducibility(NamedTuple):
    """Outcome of :func:`irreducible`.

    ``kind`` is ``"irreducible"``, ``"disconnected"`` or ``"bipartite"``.
    ``witness`` holds the connected components (disconnected) or the two
    colour classes (bipartite), each as a sorted tuple of vertex indices.
    """

    ok: bool
    kind: str
    witness: tuple

    def __bool__(self):
        return self.ok


class _Report:
    def to_kv(self, prefix=""):
        """Flat ``key=value`` lines, one per field."""
        return "\n".join(f"{prefix}{k}={_fmt(v)}" for k, v in asdict(self).items())

    @classmethod
    def csv_header(cls):
        return list(cls.__dataclass_fields__)

    def to_csv_row(self):
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerow(
            [_fmt(v) for v in asdict(self).values()])
        return buf.getvalue()


def _fmt(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)


@dataclass(frozen=True)
class RegularityReport(_Report):
    eps_achieved: Optional[float] = None
    eps_target: Optional[float] = None
    almost_regular: Optional[bool] = None
    wb_samples: Optional[int] = None
    wb_violations: Optional[int] = None
    K_hat: Optional[float] = None


@dataclass(frozen=True)
class MaximizerReport(_Report):
    linf_dist: float
    bound: float
    within_bound: bool
    regime: str


def degree(A, i, V=None):
    """Partial row sum ``d(i, V) = sum_{j in V} a_ij``; ``V=None`` means all columns."""
    arr = as_array(A)
    n = arr.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"row index {i} out of range for n={n}")
    if V is None:
        return float(arr[i].sum())
    idx = np.fromiter(V, dtype=np.intp)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError(f"column set {sorted(V)} out of range for n={n}")
    return float(arr[i, idx].sum())


def irreducible(A):
    """Decide irreducibility of ``A^T A`` from the support graph of ``A``."""
    arr = as_array(A)
    n = arr.shape[0]
    support = scipy.sparse.csr_matrix(arr > 0)
    ncomp, labels = connected_components(support, directed=False)
    if ncomp > 1:
        comps = tuple(tuple(np.flatnonzero(labels == c).tolist()) for c in range(ncomp))
        return Irreducibility(False, "disconnected", comps)
    # A connected graph is bipartite iff its bipartite double cover is disconnected.
    cover = scipy.sparse.bmat([[None, support], [support, None]], format="csr")
    _, cover_labels = connected_components(cover, directed=False)
    side = cover_labels[:n] == cover_labels[0]
    if np.array_equal(cover_labels[:n], cover_labels[n:]):
        return Irreducibility(True, "irreducible", ())
    if n == 1:
        return Irreducibility(False, "disconnected", ((0,),))
    classes = (tuple(np.flatnonzero(side).tolist()), tuple(np.flatnonzero(~side).tolist()))
    return Irreducibility(False, "bipartite", classes)


def estimate_K(A):
    """``max(sample variance / sample mean of the off-diagonal entries, 1)``."""
    arr = as_array(A)
    n = arr.shape[0]
    if n < 2:
        return 1.0
    upper = arr[np.triu_indices(n, k=1)]
    mean = upper.mean()
    if mean <= 0 or upper.size < 2:
        return 1.0
    return max(float(upper.var(ddof=1) / mean), 1.0)


def almost_regular(A, mu, eps_target):
    """Smallest ``eps`` with ``max_i |d(i) - n mu| <= n mu eps``, compared to a target."""
    mu = check_positive(mu, "mu")
    arr = as_array(A)
    n = arr.shape[0]
    eps = float(np.max(np.abs(arr.sum(axis=1) - n * mu)) / (n * mu))
    return RegularityReport(eps_achieved=eps, eps_target=float(eps_target),
                            almost_regular=eps <= eps_target, K_hat=estimate_K(arr))


def default_delta(n, mu, eps, K=1.0):
    """``mu * delta_2`` with ``delta_1 = exp(-n eps^2 mu / (4.9 K))``,
    ``delta_2 = delta_1 log(n) / sqrt(mu)``."""
    delta1 = math.exp(-n * eps * eps * mu / (4.9 * K))
    return mu * delta1 * math.log(n) / math.sqrt(mu)


def subset_violations(A, mu, eps, delta, subsets):
    """Flag the subsets ``V`` (rows of a boolean matrix) failing the balance test.

    For each ``V`` the exception set is every ``i`` outside ``V`` with
    ``|d(i, V) - mu |V|| > n mu eps``; ``V`` is a violation when some row has
    ``d(i, V_ex) > n delta``.
    """
    arr = as_array(A)
    n = arr.shape[0]
    masks = np.atleast_2d(np.asarray(subsets, dtype=bool))
    member = masks.astype(float)
    partial = member @ arr  # partial[k, i] = d(i, V_k) since A is symmetric
    sizes = member.sum(axis=1, keepdims=True)
    exc = (np.abs(partial - mu * sizes) > n * mu * eps) & ~masks
    exc_deg = exc.astype(float) @ arr
    return exc_deg.max(axis=1) > n * delta


def _all_subsets(n):
    codes = np.arange(2 ** n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(bool)


def _sampled_subsets(arr, num_subsets, seed):
    n = arr.shape[0]
    rng = np.random.Generator(np.random.Philox(seed))
    sizes = rng.integers(0, n + 1, size=num_subsets)
    keys = rng.random((num_subsets, n))
    ranks = np.argsort(np.argsort(keys, axis=1), axis=1)
    random_sets = ranks < sizes[:, None]
    order = np.argsort(arr.sum(axis=1), kind="stable")
    prefix = np.zeros((n, n), dtype=bool)
    for k in range(n):
        prefix[k, order[: k + 1]] = True
    return np.vstack([random_sets, prefix])


def well_balanced_sampled(A, mu, eps, delta=None, num_subsets=200, seed=0, K=1.0):
    """Count balance violations over all subsets (``n <= 15``) or a sample.

    The sample is ``num_subsets`` random subsets with uniformly drawn sizes
    plus the ``n`` prefixes of the vertices sorted by degree.
    """
    mu = check_positive(mu, "mu")
    if int(num_subsets) < 1:
        raise ValueError(f"num_subsets must be >= 1, got {num_subsets}")
    arr = as_array(A)
    n = arr.shape[0]
    if delta is None:
        delta = default_delta(n, mu, eps, K)
    if n <= EXHAUSTIVE_MAX_N:
        subsets = _all_subsets(n)
    else:
        subsets = _sampled_subsets(arr, int(num_subsets), seed)
    flags = np.concatenate([
        subset_violations(arr, mu, eps, delta, chunk)
        for chunk in np.array_split(subsets, max(1, len(subsets) // 4096))
    ])
    return RegularityReport(wb_samples=int(len(subsets)), wb_violations=int(flags.sum()))


def maximizer_bound(A, params, result, mu, K=1.0):
    """Compare ``||v - n**(-1/r) 1||_inf`` with the large-``n`` bound.

    ``p < r``: ``sqrt(20K) p/(r-p) n**(-1/r) sqrt(log n / (n mu))``;
    ``p = r``: ``sqrt(80K) (4 + 1/(r-1)) n**(-1/r) sqrt(log n / (n mu))``.
    """
    mu = check_positive(mu, "mu")
    arr = as_array(A)
    n = arr.shape[0]
    r, p = params.r, params.p
    v = np.asarray(result.v, dtype=float)
    linf = float(np.max(np.abs(v - n ** (-1.0 / r))))
    scale = n ** (-1.0 / r) * math.sqrt(math.log(n) / (n * mu))
    if p < r:
        regime = "p_lt_r"
        bound = math.sqrt(20.0 * K) * p / (r - p) * scale
    else:
        regime = "p_eq_r"
        bound = math.sqrt(80.0 * K) * (4.0 + 1.0 / (r - 1.0)) * scale
    return MaximizerReport(linf_dist=linf, bound=bound, within_bound=linf <= bound, regime=regime)

