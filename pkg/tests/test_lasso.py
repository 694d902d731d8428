import numpy as np
import pytest

from isvb.errors import ConfigError, DataError, NumericalError
from isvb.lasso import LassoFit, cv_lasso, default_lambda_grid, estimate_noise, lasso_path
from isvb.rng import rng_stream


def objective(X, Y, beta, lam):
    r = Y - X @ beta
    return 0.5 * float(r @ r) / X.shape[0] + lam * np.abs(beta).sum()


def test_soft_threshold_kill():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((20, 1))
    Y = rng.standard_normal(20)
    lam_max = abs(float(X[:, 0] @ Y)) / 20
    fits = lasso_path(X, Y, [lam_max * 1.01])
    assert fits[0].coefficients[0] == 0.0


def test_one_dimensional_closed_form():
    # soft-threshold oracle: S(X'Y/n, lam) / (X'X/n) with X=[2], Y=[4], lam=1
    X = np.array([[2.0]])
    Y = np.array([4.0])
    fit = lasso_path(X, Y, [1.0])[0]
    assert abs(fit.coefficients[0] - 1.75) < 1e-10


def test_objective_matches_grid_search():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((6, 3))
    Y = rng.standard_normal(6) + X[:, 0]
    lam = 0.2
    fit = lasso_path(X, Y, [lam])[0]
    grid = np.linspace(-1.5, 1.5, 61)
    best = np.inf
    for b0 in grid:
        for b1 in grid:
            r01 = Y - X[:, 0] * b0 - X[:, 1] * b1
            # profile the third coordinate on a finer grid around its 1-d optimum
            for b2 in np.linspace(-1.5, 1.5, 301):
                val = objective(X, Y, np.array([b0, b1, b2]), lam)
                if val < best:
                    best = val
    assert objective(X, Y, fit.coefficients, lam) <= best + 1e-4


def test_kkt_residuals_random_instances():
    for seed in range(5):
        rng = np.random.default_rng(seed)
        n, p = 40, 25
        X = rng.standard_normal((n, p))
        beta = np.zeros(p)
        beta[:3] = [2.0, -1.0, 0.5]
        Y = X @ beta + rng.standard_normal(n)
        for lam in (0.5, 0.1, 0.02):
            fit = lasso_path(X, Y, [lam])[0]
            g = X.T @ (Y - X @ fit.coefficients) / n
            active = fit.coefficients != 0
            if (~active).any():
                assert np.abs(g[~active]).max() <= lam + 1e-6
            if active.any():
                assert np.abs(g[active] - lam * np.sign(fit.coefficients[active])).max() <= 1e-6


def test_path_warm_start_objective_optimality():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((30, 10))
    Y = X[:, 0] * 2 + rng.standard_normal(30)
    lambdas = default_lambda_grid(X, Y, n_lambdas=20)
    fits = lasso_path(X, Y, lambdas)
    # each path point beats single-lambda cold solves up to tolerance
    for i in (0, 7, 19):
        cold = lasso_path(X, Y, [lambdas[i]])[0]
        a = objective(X, Y, fits[i].coefficients, lambdas[i])
        b = objective(X, Y, cold.coefficients, lambdas[i])
        assert a <= b * (1 + 1e-7) + 1e-12


def test_lasso_path_validation():
    X = np.eye(3)
    Y = np.ones(3)
    with pytest.raises(ConfigError):
        lasso_path(X, Y, [])
    with pytest.raises(ConfigError):
        lasso_path(X, Y, [0.1, 0.5])  # ascending
    with pytest.raises(ConfigError):
        lasso_path(X, Y, [0.5, -0.1])


def test_cv_pure_noise_selects_sparse():
    hits = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((100, 50))
        Y = rng.standard_normal(100)
        fit = cv_lasso(X, Y, rng=rng_stream(seed, 1))
        hits += fit.support_size <= 5
    assert hits >= 45  # >= 90% of seeds


def test_cv_strong_signal_detected():
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        X = rng.standard_normal((80, 30))
        Y = 10.0 * X[:, 0] + rng.standard_normal(80)
        fit = cv_lasso(X, Y, rng=rng_stream(seed, 2))
        assert fit.coefficients[0] != 0.0


def test_cv_deterministic_given_seed():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((60, 20))
    Y = X[:, 0] + rng.standard_normal(60)
    a = cv_lasso(X, Y, rng=rng_stream(7))
    b = cv_lasso(X, Y, rng=rng_stream(7))
    assert a.lam == b.lam
    assert np.array_equal(a.coefficients, b.coefficients)


def test_cv_one_se_rule_is_sparser():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((80, 40))
    Y = 3 * X[:, 0] + rng.standard_normal(80)
    fit_min = cv_lasso(X, Y, rng=rng_stream(1), rule="min")
    fit_1se = cv_lasso(X, Y, rng=rng_stream(1), rule="1se")
    assert fit_1se.lam >= fit_min.lam


def test_cv_standardize_recovers_scale():
    rng = np.random.default_rng(13)
    X = rng.standard_normal((80, 10))
    X[:, 0] *= 10.0
    Y = 0.5 * X[:, 0] + rng.standard_normal(80)
    fit = cv_lasso(X, Y, rng=rng_stream(2), standardize=True)
    assert abs(fit.coefficients[0] - 0.5) < 0.1


def test_cv_validation():
    X = np.random.default_rng(0).standard_normal((12, 3))
    Y = np.ones(12)
    with pytest.raises(ConfigError):
        cv_lasso(X, Y, n_folds=1)
    with pytest.raises(DataError):
        cv_lasso(X, Y, n_folds=10)  # folds would have < 2 rows


def test_estimate_noise_formula():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((10, 4))
    beta = np.array([1.0, -2.0, 0.0, 0.0])
    resid = rng.standard_normal(10)
    Y = X @ beta + resid
    fit = LassoFit(coefficients=beta, lam=0.1)
    assert abs(estimate_noise(X, Y, fit) - float(resid @ resid) / 7.0) < 1e-12
    exact = LassoFit(coefficients=beta, lam=0.1)
    assert estimate_noise(X, X @ beta, exact) == 0.0


def test_estimate_noise_degenerate_df():
    X = np.random.default_rng(2).standard_normal((4, 4))
    fit = LassoFit(coefficients=np.ones(4), lam=0.1)
    with pytest.raises(NumericalError):
        estimate_noise(X, np.ones(4), fit)


def test_noise_estimate_near_truth():
    hits = 0
    for seed in range(15):
        rng = np.random.default_rng(200 + seed)
        X = rng.standard_normal((100, 200))
        beta = np.zeros(200)
        beta[:3] = np.log(100)
        Y = X @ beta + rng.standard_normal(100)
        fit = cv_lasso(X, Y, rng=rng_stream(seed, 3))
        s2 = estimate_noise(X, Y, fit)
        hits += 0.7 <= s2 <= 1.4
    assert hits >= 13
