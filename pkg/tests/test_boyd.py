import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opnorm import oracle, spectral
from opnorm.boyd import PowerOptions, apply_B, apply_S, apply_W, compute_norm, \
    fixed_point_residual, iterate
from opnorm.core import NormParams, SymMatrix, lq_norm, v_norm
from opnorm.ensembles import generator
from opnorm.exceptions import ConvergenceError, DegenerateError, ReducibleError

# Maximum of ||A x||_{1.5} over ||x||_{2.5} <= 1 for the seed-42 3x3 fixture,
# from the grid and multistart oracles (they agree to 1e-15).
SEED42_GAMMA = 2.0509327159272974
SEED42_ARGMAX = [0.59114011, 0.62251326, 0.71054124]

MEAN3 = SymMatrix.mean_matrix(3, 0.5)


def test_apply_S_examples(perm2):
    np.testing.assert_allclose(apply_S(perm2, NormParams(2, 2), np.ones(2)), [1, 1])
    np.testing.assert_allclose(apply_S(2 * perm2, NormParams(2, 2), np.array([1.0, 0.0])), [4, 0])
    np.testing.assert_allclose(apply_S(perm2, NormParams(3, 2), np.ones(2)), [1, 1])


def test_apply_W_examples(perm2):
    np.testing.assert_allclose(apply_W(perm2, NormParams(2, 2), np.ones(2)), [2 ** -0.5] * 2)
    np.testing.assert_allclose(apply_W(2 * perm2, NormParams(2, 2), np.array([1.0, 0.0])), [1, 0])
    np.testing.assert_allclose(apply_W(MEAN3, NormParams(2, 2), np.ones(3)), [3 ** -0.5] * 3)


def test_compute_norm_examples(perm2):
    res = compute_norm(perm2, NormParams(3, 2))
    assert res.gamma == pytest.approx(2 ** (1 / 6), abs=1e-12)
    np.testing.assert_allclose(res.v, [2 ** (-1 / 3)] * 2)
    res = compute_norm(MEAN3, NormParams(2, 2))
    assert res.gamma == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(res.v, [3 ** -0.5] * 3)


def test_seed42_against_frozen_oracle(seed42_uniform3):
    res = compute_norm(seed42_uniform3, NormParams(2.5, 1.5))
    assert abs(res.gamma - SEED42_GAMMA) <= 1e-6
    np.testing.assert_allclose(res.v, SEED42_ARGMAX, atol=1e-7)
    assert fixed_point_residual(seed42_uniform3, NormParams(2.5, 1.5), res.v) <= 1e-10


def test_seed42_against_bruteforce(seed42_uniform3):
    params = NormParams(2.5, 1.5)
    ref = oracle.maximize_bruteforce(seed42_uniform3, params)
    assert abs(compute_norm(seed42_uniform3, params).gamma - ref.value) <= 1e-6


def test_fixed_point_residual_examples(perm2):
    assert fixed_point_residual(perm2, NormParams(2, 2), np.array([2 ** -0.5] * 2)) \
        == pytest.approx(0, abs=1e-15)
    assert fixed_point_residual(MEAN3, NormParams(2, 2), np.array([3 ** -0.5] * 3)) \
        == pytest.approx(0, abs=1e-15)


def test_apply_B_examples(perm2):
    v = np.full(3, 3 ** -0.5)
    np.testing.assert_allclose(apply_B(MEAN3, NormParams(2, 2), v, v), v)
    np.testing.assert_allclose(apply_B(MEAN3, NormParams(2, 2), v, np.array([1.0, -1, 0])),
                               [0.25, -0.25, 0])
    np.testing.assert_allclose(
        apply_B(perm2, NormParams(2, 2), np.full(2, 2 ** -0.5), np.array([1.0, -1])), [1, -1])


def test_reducible_and_degenerate_inputs():
    path = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
    with pytest.raises(ReducibleError) as info:
        compute_norm(path, NormParams(2, 2))
    assert info.value.kind == "bipartite"
    with pytest.raises(DegenerateError):
        compute_norm(np.zeros((3, 3)), NormParams(2, 2))


def test_convergence_error():
    A = generator(5, 0).uniform(size=(6, 6))
    A = A + A.T
    with pytest.raises(ConvergenceError):
        compute_norm(A, NormParams(3, 1.5), PowerOptions(tol=1e-14, max_iter=1))


def test_options_validation():
    with pytest.raises(ValueError):
        PowerOptions(tol=0)
    with pytest.raises(ValueError):
        PowerOptions(max_iter=0)
    with pytest.raises(ValueError):
        PowerOptions(start=np.array([1.0, 0.0]))


def _random_sym(k, n):
    A = generator(77, k).uniform(size=(n, n))
    return A + A.T


PAIRS = [(2, 2), (3, 2), (4, 1.5), (3, 3), (2.5, 1.2)]


@pytest.mark.parametrize("k", range(5))
def test_uniqueness_across_starts(k):
    A = _random_sym(k, 12)
    params = NormParams(*PAIRS[k])
    rng = generator(78, k)
    vs = [compute_norm(A, params, PowerOptions(start=rng.uniform(0.01, 1, 12))).v
          for _ in range(10)]
    assert np.ptp(np.array(vs), axis=0).max() <= 1e-8


@pytest.mark.parametrize("c", [0.5, 2, 10])
def test_scale_equivariance(c):
    A = _random_sym(9, 8)
    params = NormParams(3, 2)
    a, b = compute_norm(A, params), compute_norm(c * A, params)
    assert b.gamma == pytest.approx(c * a.gamma, rel=1e-10)
    np.testing.assert_allclose(b.v, a.v, atol=1e-10)


@pytest.mark.parametrize("k", range(4))
def test_norm_between_uniform_value_and_oracle(k):
    A = _random_sym(20 + k, 3)
    params = NormParams(*PAIRS[k])
    g = compute_norm(A, params).gamma
    assert g >= lq_norm(params.p, A @ np.full(3, 3 ** (-1 / params.r))) - 1e-12
    assert g <= oracle.maximize_multistart(A, params).value + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(PAIRS))
def test_B_is_self_adjoint(seed, rp):
    params = NormParams(*rp)
    rng = generator(seed)
    A = _random_sym(seed, 7)
    v = compute_norm(A, params).v
    x, y = rng.normal(size=7), rng.normal(size=7)
    w = v ** (params.r - 2)
    lhs = np.sum(w * apply_B(A, params, v, x) * y)
    rhs = np.sum(w * x * apply_B(A, params, v, y))
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("rp", [(2, 2), (3, 2), (4, 1.5), (3, 3)])
def test_contraction_rate(rp):
    params = NormParams(*rp)
    A = generator(31).uniform(size=(30, 30))
    A = A + A.T
    res = compute_norm(A, params, PowerOptions(tol=1e-14))
    lam2 = spectral.lambda2_B(A, params, res.v, tol=1e-14)
    rate = (params.p - 1) * lam2 / ((params.r - 1) * res.gamma ** params.p)
    errs = []
    for v, _, _ in itertools.islice(iterate(A, params), 200):
        if np.max(np.abs(v - res.v)) <= 1e-3:
            err = v_norm(res.v, v - res.v, params.r)
            if err < 1e-11:
                break
            errs.append(err)
    assert len(errs) >= 2
    ratios = np.array(errs[1:]) / np.array(errs[:-1])
    assert ratios.max() <= 1.1 * rate
