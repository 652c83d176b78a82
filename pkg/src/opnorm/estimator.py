"""scikit-learn style wrappers around the norm computations.

The estimators hold only hyperparameters in ``__init__`` and expose the
results of :meth:`fit` as trailing-underscore attributes, so they work with
``get_params``/``set_params``, ``clone`` and parameter grids.
"""

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_sym_matrix
from .boyd import PowerOptions, compute_norm
from .core import NormParams

__all__ = ["OperatorNorm", "GrothendieckNorm"]


class OperatorNorm(BaseEstimator):
    """``||A||_{r -> p}`` of a symmetric nonnegative matrix.

    Parameters
    ----------
    r, p : float
        Exponents with ``1 < p <= r``.
    tol : float
        Stopping tolerance of the power iteration.
    max_iter : int
        Iteration cap.
    start : "uniform" or array-like
        Starting vector.
    check_irreducible : bool
        Refuse inputs whose ``A^T A`` is reducible.

    Attributes
    ----------
    gamma_ : float
        The norm.
    v_ : ndarray of shape (n,)
        Positive maximizer with unit r-norm.
    n_iter_ : int
    residual_ : float
    result_ : PowerResult
    n_features_in_ : int
    """

    def __init__(self, r=2.0, p=2.0, tol=1e-10, max_iter=10000, start="uniform",
                 check_irreducible=True):
        self.r = r
        self.p = p
        self.tol = tol
        self.max_iter = max_iter
        self.start = start
        self.check_irreducible = check_irreducible

    def _norm_params(self):
        return NormParams(self.r, self.p)

    def fit(self, X, y=None):
        arr = check_sym_matrix(X)
        opts = PowerOptions(tol=self.tol, max_iter=self.max_iter, start=self.start)
        res = compute_norm(arr, self._norm_params(), opts, check=self.check_irreducible)
        self.result_ = res
        self.gamma_ = res.gamma
        self.v_ = res.v
        self.n_iter_ = res.iterations
        self.residual_ = res.residual
        self.n_features_in_ = arr.shape[0]
        return self

    def score(self, X=None, y=None):
        """The fitted norm (``X`` is ignored)."""
        check_is_fitted(self, "gamma_")
        return self.gamma_


class GrothendieckNorm(OperatorNorm):
    """``M_r(A) = max x^T A x`` over the unit r-ball, as ``||A||_{r -> r*}``; needs ``r >= 2``.

    The value is stored in ``gamma_`` and, under its usual name, in ``M_``.
    """

    def __init__(self, r=2.0, tol=1e-10, max_iter=10000, start="uniform",
                 check_irreducible=True):
        self.r = r
        self.tol = tol
        self.max_iter = max_iter
        self.start = start
        self.check_irreducible = check_irreducible

    def _norm_params(self):
        if not self.r >= 2:
            raise ValueError(f"r must be >= 2, got {self.r}")
        return NormParams(self.r, self.r / (self.r - 1.0))

    def fit(self, X, y=None):
        super().fit(X, y)
        self.M_ = self.gamma_
        return self
