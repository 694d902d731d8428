"""Debiasing transformation: projects the data onto the orthogonal
complement of the target columns, producing a nuisance regression plus the
quantities needed to map nuisance draws back onto the target coordinates."""

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ConfigError
from .linalg import orthonormal_complement, spd_inverse


@dataclass(frozen=True)
class PreprocessedData:
    """Transformed data for a target index set of size k.

    P spans the orthogonal complement of the target columns; (W_check,
    Y_check) is the nuisance regression; Sigma_k the inverse Gram of the
    target columns; Gamma_k maps a nuisance vector to its leakage onto the
    targets; projected_target is the least-squares projection of Y onto
    the target columns.
    """

    target_indices: np.ndarray  # original column labels, in request order
    nuisance_indices: np.ndarray
    P: np.ndarray
    W_check: np.ndarray
    Y_check: np.ndarray
    Sigma_k: np.ndarray
    Gamma_k: np.ndarray
    X1k_gram: np.ndarray
    projected_target: np.ndarray

    @property
    def k(self):
        return self.target_indices.shape[0]

    @property
    def n(self):
        return self.P.shape[0]

    @property
    def p(self):
        return self.k + self.nuisance_indices.shape[0]


def rescale_by_noise(d, sigma_hat):
    """Divide X and Y by the estimated noise scale sigma_hat.

    The coefficient vector is unchanged by the joint rescaling; the truth
    noise variance, when present, is rescaled accordingly.
    """
    if sigma_hat <= 0:
        raise ConfigError(f"sigma_hat must be positive, got {sigma_hat}")
    sigma2 = None if d.sigma2_true is None else d.sigma2_true / sigma_hat**2
    return Dataset(X=d.X / sigma_hat, Y=d.Y / sigma_hat, beta_true=d.beta_true, sigma2_true=sigma2)


def _validate_targets(target_indices, p):
    idx = np.asarray(target_indices, dtype=np.int64).reshape(-1)
    if idx.size == 0:
        raise ConfigError("need at least one target index")
    if np.unique(idx).size != idx.size:
        raise ConfigError("target indices must be distinct")
    if idx.min() < 0 or idx.max() >= p:
        raise ConfigError(f"target indices out of range for p={p}")
    return idx


def preprocess(d, target_indices):
    """Build the transformed data for the given (0-based) target columns.

    Columns are internally permuted so the targets occupy the leading
    positions; the original labels are recorded for reporting.
    """
    idx = _validate_targets(target_indices, d.p)
    k = idx.size
    if d.n <= k:
        raise ConfigError(f"need n > k, got n={d.n}, k={k}")
    rest = np.setdiff1d(np.arange(d.p), idx)
    X1k = d.X[:, idx]
    Xmk = d.X[:, rest]
    P = orthonormal_complement(X1k)
    gram = X1k.T @ X1k
    Sigma_k = spd_inverse(gram)
    return PreprocessedData(
        target_indices=idx,
        nuisance_indices=rest,
        P=P,
        W_check=P.T @ Xmk,
        Y_check=P.T @ d.Y,
        Sigma_k=Sigma_k,
        Gamma_k=Sigma_k @ (X1k.T @ Xmk),
        X1k_gram=gram,
        projected_target=Sigma_k @ (X1k.T @ d.Y),
    )


def debias_map_apply(pp, beta_minus_k):
    """Leakage of a sparse nuisance vector onto the targets: Gamma_k @ beta.

    Cost is O(k * nnz(beta_minus_k)).
    """
    b = np.asarray(beta_minus_k, dtype=float)
    if b.shape != (pp.p - pp.k,):
        raise ValueError(f"expected nuisance vector of length {pp.p - pp.k}, got {b.shape}")
    nz = np.flatnonzero(b)
    if nz.size == 0:
        return np.zeros(pp.k)
    return pp.Gamma_k[:, nz] @ b[nz]
