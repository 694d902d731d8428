"""Dense linear-algebra primitives used throughout the package.

Matrices are plain float ndarrays. Routines validate finiteness and
positive definiteness where the downstream math requires it.
"""

import numpy as np
import scipy.linalg

from .errors import IdentifiabilityError, NotSpdError


def as_finite_array(a, name="array", ndim=None):
    """Convert to a float ndarray, rejecting NaN/Inf entries."""
    out = np.asarray(a, dtype=float)
    if ndim is not None and out.ndim != ndim:
        raise ValueError(f"{name} must have {ndim} dimensions, got {out.ndim}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


def check_symmetric(A, rtol=1e-10, name="matrix"):
    A = as_finite_array(A, name, ndim=2)
    if A.shape[0] != A.shape[1]:
        raise NotSpdError(f"{name} is not square: {A.shape}")
    scale = max(np.abs(A).max(), 1.0)
    if np.abs(A - A.T).max() > rtol * scale:
        raise NotSpdError(f"{name} is not symmetric to relative {rtol}")
    return A


def spd_cholesky(A, name="matrix"):
    """Lower Cholesky factor of a symmetric positive-definite matrix."""
    A = check_symmetric(A, name=name)
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotSpdError(f"{name} is not positive definite") from exc


def spd_inverse(A):
    """Inverse of an SPD matrix via Cholesky; result symmetrized exactly."""
    L = spd_cholesky(A)
    inv = scipy.linalg.cho_solve((L, True), np.eye(A.shape[0]))
    return (inv + inv.T) / 2.0


def orthonormal_complement(B):
    """Orthonormal basis of the orthogonal complement of span(B).

    Uses the Householder QR factorization of the n x k matrix B and
    returns the trailing n-k columns of the full Q factor, so that
    P^T P = I and P^T B = 0. The LAPACK Householder pivot order is
    deterministic, making the (sign-arbitrary) basis reproducible.
    """
    B = as_finite_array(B, "B", ndim=2)
    n, k = B.shape
    if k >= n:
        raise IdentifiabilityError(f"need fewer columns than rows, got {B.shape}")
    Q, R = np.linalg.qr(B, mode="complete")
    diag = np.abs(np.diag(R[:k, :k]))
    tol = n * np.finfo(float).eps * max(diag.max(), 1e-300)
    if diag.min() <= tol:
        raise IdentifiabilityError("columns are linearly dependent")
    return Q[:, k:]


def mvn_sample(mean, cov, rng, size=None):
    """Draw from N(mean, cov) with cov SPD, via the Cholesky factor.

    Returns a vector when size is None, else a (size, k) array.
    """
    mean = as_finite_array(mean, "mean", ndim=1)
    L = spd_cholesky(cov, name="cov")
    if mean.shape[0] != L.shape[0]:
        raise ValueError("mean/cov dimension mismatch")
    if size is None:
        return mean + L @ rng.standard_normal(mean.shape[0])
    z = rng.standard_normal((int(size), mean.shape[0]))
    return mean + z @ L.T
