"""r -> p operator norms of symmetric nonnegative matrices.

The norm is computed by Boyd's nonlinear power iteration
(:func:`compute_norm`). Around it sit a few other pieces:

* oracles that check it (:mod:`opnorm.oracle`);
* random ensembles (:mod:`opnorm.ensembles`);
* structural and spectral diagnostics (:mod:`opnorm.diagnostics`, :mod:`opnorm.spectral`);
* a Monte Carlo harness for the central limit behaviour of the norm (:mod:`opnorm.stats`).
"""

from .boyd import PowerOptions, PowerResult, apply_B, apply_S, apply_W, compute_norm, \
    fixed_point_residual
from .core import NormParams, SymMatrix, big_psi, holder_conjugate, lq_norm, matvec, psi, v_norm
from .diagnostics import irreducible
from .ensembles import EnsembleSpec, center, epsilon_n, sample
from .estimator import GrothendieckNorm, OperatorNorm
from .exceptions import ConvergenceError, DegenerateError, InstabilityError, OpNormError, \
    ReducibleError
from .mmio import read_matrix_market, write_matrix_market
from .stats import alpha_n, clt_statistic, eta, grothendieck_mr, run_clt_experiment

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DegenerateError",
    "EnsembleSpec",
    "GrothendieckNorm",
    "InstabilityError",
    "NormParams",
    "OpNormError",
    "OperatorNorm",
    "PowerOptions",
    "PowerResult",
    "ReducibleError",
    "SymMatrix",
    "alpha_n",
    "apply_B",
    "apply_S",
    "apply_W",
    "big_psi",
    "center",
    "clt_statistic",
    "compute_norm",
    "epsilon_n",
    "eta",
    "fixed_point_residual",
    "grothendieck_mr",
    "holder_conjugate",
    "irreducible",
    "lq_norm",
    "matvec",
    "psi",
    "read_matrix_market",
    "run_clt_experiment",
    "sample",
    "v_norm",
    "write_matrix_market",
]
