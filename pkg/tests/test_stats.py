import math

import numpy as np
import pytest

from opnorm import stats
from opnorm.boyd import apply_W, compute_norm, uniform_start
from opnorm.core import NormParams, SymMatrix, lq_norm
from opnorm.ensembles import EnsembleSpec, generator, sample
from opnorm.exceptions import ReducibleError


def test_alpha_n_examples():
    assert stats.alpha_n(100, 0.3, 0.21, NormParams(2, 2)) == pytest.approx(30.4)
    assert stats.alpha_n(100, 0.3, 0.21, NormParams(3, 3)) == pytest.approx(30.575)
    assert stats.alpha_n(100, 0.3, 0.0, NormParams(3, 2), zeta=0.2) == pytest.approx(29.9)


def test_alpha_n_inhom_examples():
    s2 = 100 * 99 * 0.21 / 2
    assert stats.alpha_n_inhom(100, 0.3, s2, NormParams(2, 2)) == pytest.approx(30.393)
    assert stats.alpha_n_inhom(100, 0.3, 0.0, NormParams(2, 2)) == pytest.approx(29.7)


def test_eta_examples(perm2):
    assert stats.eta(perm2, NormParams(2, 2)) == pytest.approx(1.0)
    A = SymMatrix.mean_matrix(3, 0.4)
    params = NormParams(3, 2)
    assert stats.eta(A, params) == pytest.approx(compute_norm(A, params).gamma, rel=1e-14)


def test_eta_is_one_power_step():
    A = sample(EnsembleSpec("er", 60, 0.3, seed=5)).entries
    params = NormParams(3, 2)
    w = apply_W(A, params, uniform_start(60, 3))
    assert stats.eta(A, params) == pytest.approx(lq_norm(2, A @ w), rel=1e-14)


@pytest.mark.parametrize("rp", [(2, 2), (3, 2), (4, 1.5)])
def test_eta_sandwich(rp):
    params = NormParams(*rp)
    A = sample(EnsembleSpec("exponential", 80, 0.5, seed=6)).entries
    e = stats.eta(A, params)
    assert e <= compute_norm(A, params).gamma + 1e-10
    assert e >= lq_norm(params.p, A @ uniform_start(80, params.r)) - 1e-10


def test_eta_gap_er():
    n, mu = 500, 0.3
    A = sample(EnsembleSpec("er", n, mu, seed=11)).entries
    params = NormParams(2, 2)
    gap = abs(stats.eta(A, params) - compute_norm(A, params).gamma)
    assert gap / stats.eta_gap_scale(n, mu, 0.21, params) <= 20


def test_statistic_needs_variance():
    with pytest.raises(ValueError, match="sigma 0"):
        stats.clt_statistic(SymMatrix.mean_matrix(5, 0.2), NormParams(2, 2), 0.2, 0.0)


def test_inhom_agrees_with_hom():
    n, mu, sigma2 = 200, 0.3, 0.21
    params = NormParams(3, 2)
    target = 3.0
    gamma = (stats.alpha_n(n, mu, sigma2, params) + target * math.sqrt(sigma2)) \
        * n ** params.uniform_exponent
    A = SymMatrix.mean_matrix(n, mu)
    hom = stats.clt_statistic(A, params, mu, sigma2, gamma=gamma)
    inhom = stats.clt_statistic(A, params, mu, mode="inhom", sigma2_sum=n * (n - 1) * sigma2 / 2,
                                gamma=gamma)
    assert hom == pytest.approx(target)
    assert abs(inhom - hom) <= 2 / n * abs(hom)


def test_statistic_accepts_power_result():
    A = sample(EnsembleSpec("er", 100, 0.3, seed=2)).entries
    params = NormParams(3, 2)
    res = compute_norm(A, params)
    a = stats.clt_statistic(A, params, 0.3, 0.21, gamma=res)
    assert a == stats.clt_statistic(A, params, 0.3, 0.21, gamma=res.gamma)
    assert a == stats.clt_statistic(A, params, 0.3, 0.21)


def test_small_experiment_is_deterministic():
    spec = EnsembleSpec("er", 60, 0.3, seed=4)
    a = stats.run_clt_experiment(spec, NormParams(2, 2), 2)
    b = stats.run_clt_experiment(spec, NormParams(2, 2), 2, workers=1)
    assert a.samples.shape == (2,)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert a.records == b.records
    assert tuple(a.records[0]) == tuple(stats.CSV_COLUMNS)
    assert a.variance >= 0 and 0 <= a.ks_pvalue <= 1


def test_reducible_replicates_are_resampled():
    # sparse enough that some draws have an isolated vertex
    s = stats.run_clt_experiment(EnsembleSpec("er", 8, 0.35, seed=1), NormParams(2, 2), 6)
    assert s.resamples == 3
    assert all(rec["irreducible"] for rec in s.records)


def test_resampling_gives_up():
    with pytest.raises(ReducibleError) as info:
        stats.run_clt_experiment(EnsembleSpec("er", 6, 0.3, seed=0), NormParams(2, 2), 6)
    assert info.value.kind == "resample_exhausted"


def test_derivative_check_examples():
    rep = stats.derivative_check(200, 0.5, NormParams(2, 2))
    assert rep.rel_err_grad <= 0.02
    rep = stats.derivative_check(200, 0.5, NormParams(3, 2))
    assert rep.grad_theory == 2 * 200 ** (1 / 2 - 1 / 3 - 1)
    rep = stats.derivative_check(200, 0.5, NormParams(2, 2))
    assert rep.hess_diag_theory == pytest.approx(2e-4)


def test_central_difference_is_second_order():
    n, mu = 60, 0.5
    params = NormParams(3, 2)
    base = mu * (np.ones((n, n)) - np.eye(n))

    def grad(h):
        return (stats._eta_perturbed(base, params, 0, 1, h)
                - stats._eta_perturbed(base, params, 0, 1, -h)) / (2 * h)

    g = [grad(0.2 / 2 ** k) for k in range(3)]
    ratio = (g[0] - g[1]) / (g[1] - g[2])
    assert ratio == pytest.approx(4, rel=0.1)


def test_grothendieck_examples(perm2):
    assert stats.grothendieck_mr(perm2, 2) == pytest.approx(1.0)
    assert stats.grothendieck_mr(perm2, 4) == pytest.approx(math.sqrt(2), abs=1e-8)
    with pytest.raises(ValueError, match="r must be"):
        stats.grothendieck_mr(perm2, 1.5)


def test_grothendieck_matches_spectral_norm():
    A = generator(6).uniform(size=(10, 10))
    A = A + A.T
    assert stats.grothendieck_mr(A, 2) == pytest.approx(
        compute_norm(A, NormParams(2, 2)).gamma, abs=1e-9)


def test_grothendieck_er_quadratic_form():
    from opnorm import oracle
    A = sample(EnsembleSpec("er", 4, 0.8, seed=42)).entries
    assert stats.grothendieck_mr(A, 3) == pytest.approx(
        oracle.maximize_quadratic_form(A, 3).value, abs=1e-6)
