import numpy as np
import pytest

from opnorm import oracle
from opnorm.boyd import compute_norm
from opnorm.core import NormParams, SymMatrix, lq_norm
from opnorm.ensembles import generator

SEED42_GAMMA = 2.0509327159272974


def test_grid_examples(perm2):
    res = oracle.maximize_grid(perm2, NormParams(3, 2), resolution=10 ** 4)
    assert abs(res.value - 2 ** (1 / 6)) <= 1e-4
    res = oracle.maximize_grid(SymMatrix.mean_matrix(3, 0.5), NormParams(2, 2))
    assert abs(res.value - 1.0) <= 1e-4


def test_grid_seed42_reference(seed42_uniform3):
    res = oracle.maximize_grid(seed42_uniform3, NormParams(2.5, 1.5))
    assert res.value == pytest.approx(SEED42_GAMMA, abs=1e-12)


def test_multistart_examples(perm2):
    assert oracle.maximize_multistart(perm2, NormParams(2, 2)).value == pytest.approx(1, abs=1e-8)
    A = SymMatrix.mean_matrix(5, 0.2)
    params = NormParams(3, 2)
    assert abs(oracle.maximize_multistart(A, params).value
               - compute_norm(A, params).gamma) <= 1e-7


@pytest.mark.parametrize("kind, n, mu, rp, expected", [
    ("perm", 2, 1.0, (3, 2), 2 ** (1 / 6)),
    ("mean_matrix", 3, 0.5, (2, 2), 1.0),
    ("mean_matrix", 4, 0.25, (2, 2), 0.75),
])
def test_analytic_norm(kind, n, mu, rp, expected):
    assert oracle.analytic_norm(kind, n, mu, NormParams(*rp)) == pytest.approx(expected)


def test_analytic_norm_rejects_unknown_kind():
    with pytest.raises(ValueError):
        oracle.analytic_norm("ring", 3, 1.0, NormParams(2, 2))


@pytest.mark.parametrize("method", ["grid", "multistart"])
@pytest.mark.parametrize("k", range(4))
def test_result_invariants(method, k):
    rng = generator(404, k)
    n = 2 + k % 2
    A = rng.uniform(size=(n, n))
    A = A + A.T
    params = NormParams(*sorted(rng.uniform(1.1, 4, 2))[::-1])
    fn = oracle.maximize_grid if method == "grid" else oracle.maximize_multistart
    res = fn(A, params)
    assert lq_norm(params.r, res.argmax) <= 1 + 1e-9
    assert res.value == pytest.approx(lq_norm(params.p, A @ res.argmax), abs=1e-9)
    assert np.all(res.argmax > 0)


def test_multistart_size_limit():
    with pytest.raises(ValueError):
        oracle.maximize_multistart(np.ones((13, 13)), NormParams(2, 2))


def test_quadratic_form_oracle(perm2):
    assert oracle.maximize_quadratic_form(perm2, 4).value == pytest.approx(2 ** 0.5, abs=1e-9)
