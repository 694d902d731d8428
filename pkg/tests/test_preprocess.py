import numpy as np
import pytest

from isvb.data import Dataset
from isvb.errors import ConfigError, IdentifiabilityError
from isvb.preprocess import debias_map_apply, preprocess, rescale_by_noise
from isvb.rng import rng_stream


def random_dataset(seed, n=40, p=12, sigma2=1.0, beta=None):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    if beta is None:
        beta = np.zeros(p)
        beta[:3] = [2.0, -1.5, 1.0]
    Y = X @ beta + np.sqrt(sigma2) * rng.standard_normal(n)
    return Dataset(X=X, Y=Y, beta_true=beta, sigma2_true=sigma2)


def test_rescale_identity_and_halving():
    ds = random_dataset(0)
    same = rescale_by_noise(ds, 1.0)
    assert np.array_equal(same.X, ds.X) and np.array_equal(same.Y, ds.Y)
    half = rescale_by_noise(ds, 2.0)
    assert np.allclose(half.X, ds.X / 2) and np.allclose(half.Y, ds.Y / 2)
    back = rescale_by_noise(rescale_by_noise(ds, 2.0), 0.5)
    assert np.allclose(back.X, ds.X) and np.allclose(back.Y, ds.Y)
    assert np.isclose(back.sigma2_true, ds.sigma2_true)
    with pytest.raises(ConfigError):
        rescale_by_noise(ds, 0.0)


def test_orthogonal_design_gives_zero_gamma():
    n = 8
    X = np.eye(n)[:, :4] * np.array([1.0, 2.0, 3.0, 4.0])
    Y = np.arange(n, dtype=float)
    ds = Dataset(X=X, Y=Y)
    pp = preprocess(ds, [0])
    assert np.abs(pp.Gamma_k).max() < 1e-12


def test_gamma_matches_direct_dot_product():
    rng = np.random.default_rng(4)
    x1 = rng.standard_normal(30)
    X = np.column_stack([x1, 2.0 * x1 + 1e-8 * rng.standard_normal(30), rng.standard_normal(30)])
    ds = Dataset(X=X, Y=rng.standard_normal(30))
    pp = preprocess(ds, [0])
    gamma = (X[:, 0] @ X[:, 1]) / (X[:, 0] @ X[:, 0])
    assert abs(pp.Gamma_k[0, 0] - gamma) < 1e-8
    assert abs(pp.Gamma_k[0, 0] - 2.0) < 1e-6


def test_projection_identities():
    ds = random_dataset(1)
    pp = preprocess(ds, [0, 1])
    assert np.abs(pp.P.T @ pp.P - np.eye(ds.n - 2)).max() < 1e-10
    assert np.abs(pp.P.T @ ds.X[:, :2]).max() < 1e-10


def test_nuisance_regression_matches_projected_least_squares():
    ds = random_dataset(2)
    pp = preprocess(ds, [0])
    X1 = ds.X[:, :1]
    H = X1 @ np.linalg.solve(X1.T @ X1, X1.T)
    rng = np.random.default_rng(5)
    for _ in range(10):
        b = rng.standard_normal(ds.p - 1)
        lhs = np.sum((pp.Y_check - pp.W_check @ b) ** 2)
        rhs = np.sum(((np.eye(ds.n) - H) @ ds.Y - (np.eye(ds.n) - H) @ ds.X[:, 1:] @ b) ** 2)
        assert abs(lhs - rhs) < 1e-8 * (1 + abs(rhs))


def test_likelihood_decomposition_identity():
    ds = random_dataset(3, n=25, p=8)
    pp = preprocess(ds, [0, 1])
    X1k = ds.X[:, :2]
    H = X1k @ pp.Sigma_k @ X1k.T
    rng = np.random.default_rng(6)
    for _ in range(10):
        beta = rng.standard_normal(ds.p)
        beta_star = beta[:2] + pp.Gamma_k @ beta[2:]
        total = np.sum((ds.Y - ds.X @ beta) ** 2)
        part1 = np.sum((H @ ds.Y - X1k @ beta_star) ** 2)
        part2 = np.sum((pp.Y_check - pp.W_check @ beta[2:]) ** 2)
        assert abs(total - (part1 + part2)) < 1e-8 * (1 + total)


def test_projected_target_is_least_squares():
    ds = random_dataset(7)
    pp = preprocess(ds, [0, 1, 2])
    ols, *_ = np.linalg.lstsq(ds.X[:, :3], ds.Y, rcond=None)
    assert np.abs(pp.projected_target - ols).max() < 1e-10


def test_projected_noise_variance_near_truth():
    ds = random_dataset(8, n=600, p=5, sigma2=4.0)
    pp = preprocess(ds, [0])
    resid = pp.Y_check - pp.W_check @ ds.beta_true[1:]
    assert abs(resid.var() - 4.0) < 5 * 4.0 * np.sqrt(2.0 / 600)


def test_arbitrary_target_set_maps_back():
    ds = random_dataset(9, n=30, p=6)
    pp = preprocess(ds, [4, 1])
    assert np.array_equal(pp.target_indices, [4, 1])
    perm = np.concatenate([[4, 1], pp.nuisance_indices])
    Xp = ds.X[:, perm]
    pp2 = preprocess(Dataset(X=Xp, Y=ds.Y), [0, 1])
    assert np.allclose(pp.Gamma_k, pp2.Gamma_k)
    assert np.allclose(pp.projected_target, pp2.projected_target)
    assert np.allclose(pp.Sigma_k, pp2.Sigma_k)


def test_preprocess_rejects_bad_targets():
    ds = random_dataset(10)
    with pytest.raises(ConfigError):
        preprocess(ds, [0, 0])
    with pytest.raises(ConfigError):
        preprocess(ds, [ds.p])
    x1 = ds.X[:, 0]
    dup = Dataset(X=np.column_stack([x1, x1, ds.X[:, 2:]]), Y=ds.Y)
    with pytest.raises(IdentifiabilityError):
        preprocess(dup, [0, 1])


def test_debias_map_apply_sparse():
    ds = random_dataset(11)
    pp = preprocess(ds, [0, 1])
    m = ds.p - 2
    assert np.array_equal(debias_map_apply(pp, np.zeros(m)), np.zeros(2))
    e1 = np.zeros(m)
    e1[0] = 1.0
    assert np.allclose(debias_map_apply(pp, e1), pp.Gamma_k[:, 0])
    dense = np.random.default_rng(12).standard_normal(m)
    assert np.abs(debias_map_apply(pp, dense) - pp.Gamma_k @ dense).max() < 1e-12
