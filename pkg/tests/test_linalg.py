import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isvb.errors import IdentifiabilityError, NotSpdError
from isvb.linalg import mvn_sample, orthonormal_complement, spd_cholesky, spd_inverse


def test_complement_of_basis_vector():
    B = np.array([[1.0], [0.0], [0.0]])
    P = orthonormal_complement(B)
    assert P.shape == (3, 2)
    assert np.abs(P.T @ P - np.eye(2)).max() < 1e-10
    assert np.abs(P.T @ B).max() < 1e-10


def test_complement_of_embedded_identity_is_third_axis():
    B = np.zeros((3, 2))
    B[0, 0] = 1.0
    B[1, 1] = 1.0
    P = orthonormal_complement(B)
    assert P.shape == (3, 1)
    assert np.abs(np.abs(P[2, 0]) - 1.0) < 1e-12
    assert np.abs(P[:2, 0]).max() < 1e-12


def test_complement_random_rectangular():
    rng = np.random.default_rng(3)
    B = rng.standard_normal((6, 2))
    P = orthonormal_complement(B)
    assert P.shape == (6, 4)
    assert np.abs(P.T @ P - np.eye(4)).max() < 1e-10
    assert np.abs(P.T @ B).max() < 1e-10


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=12),
    k=st.integers(min_value=1, max_value=6),
    seed=st.integers(min_value=0, max_value=10_000),
)
def test_complement_projection_identity(n, k, seed):
    if k >= n:
        k = n - 1
    B = np.random.default_rng(seed).standard_normal((n, k))
    P = orthonormal_complement(B)
    assert np.abs(P.T @ P - np.eye(n - k)).max() < 1e-10
    assert np.abs(P.T @ B).max() < 1e-10
    H = B @ np.linalg.solve(B.T @ B, B.T)
    assert np.abs(P @ P.T - (np.eye(n) - H)).max() < 1e-8


def test_complement_rejects_rank_deficiency():
    B = np.ones((5, 2))
    with pytest.raises(IdentifiabilityError):
        orthonormal_complement(B)
    with pytest.raises(IdentifiabilityError):
        orthonormal_complement(np.ones((3, 3)))


def test_spd_inverse_identity_and_diagonal():
    assert np.allclose(spd_inverse(np.eye(3)), np.eye(3))
    assert np.allclose(spd_inverse(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))


def test_spd_inverse_random_residual_and_involution():
    rng = np.random.default_rng(11)
    A = rng.standard_normal((5, 5))
    A = A.T @ A + np.eye(5)
    inv = spd_inverse(A)
    assert np.abs(A @ inv - np.eye(5)).max() < 1e-8 * np.abs(A).max()
    assert np.abs(spd_inverse(inv) - A).max() < 1e-7 * np.abs(A).max()


def test_spd_rejects_non_spd():
    with pytest.raises(NotSpdError):
        spd_cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))  # indefinite
    with pytest.raises(NotSpdError):
        spd_cholesky(np.array([[1.0, 0.5], [0.4, 1.0]]))  # asymmetric
    with pytest.raises(NotSpdError):
        spd_inverse(np.diag([1.0, -1.0]))


def test_mvn_sample_moments():
    rng = np.random.default_rng(5)
    draws = mvn_sample(np.zeros(2), np.eye(2), rng, size=100_000)
    assert np.abs(draws.mean(axis=0)).max() < 0.02  # 3 / sqrt(N) CLT bound
    draws = mvn_sample(np.zeros(2), np.diag([4.0, 1.0]), rng, size=100_000)
    var = draws.var(axis=0)
    assert abs(var[0] - 4.0) < 0.2 and abs(var[1] - 1.0) < 0.05


def test_mvn_sample_deterministic():
    cov = np.array([[2.0, 0.3], [0.3, 1.0]])
    a = mvn_sample(np.ones(2), cov, np.random.default_rng(42), size=10)
    b = mvn_sample(np.ones(2), cov, np.random.default_rng(42), size=10)
    assert np.array_equal(a, b)
