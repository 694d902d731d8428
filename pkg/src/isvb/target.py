"""Exact posterior of the transformed target block under the three slab
choices (flat improper, Gaussian, Laplace), with exact or MCMC samplers.

The flat and Gaussian cases are conjugate Gaussians. The Laplace case in
one dimension is an exact two-piece truncated-Gaussian mixture; in higher
dimensions an independence Metropolis-Hastings chain uses the flat-case
Gaussian as proposal, giving the acceptance ratio
exp(-(||u'||_1 - ||u||_1) / sigma_n).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr
from scipy.stats import truncnorm

from .errors import ConfigError, NumericalError
from .linalg import mvn_sample, spd_inverse

MH_BURN_IN = 5000
MH_THIN = 5
MH_MIN_ACCEPT = 0.01


@dataclass(frozen=True)
class GPrior:
    """Slab prior on the transformed target: flat, Gaussian or Laplace."""

    kind: str  # improper | gaussian | laplace
    sigma_n: float | None = None

    def __post_init__(self):
        if self.kind not in ("improper", "gaussian", "laplace"):
            raise ConfigError(f"unknown slab prior kind {self.kind!r}")
        if self.kind in ("gaussian", "laplace"):
            if self.sigma_n is None or not np.isfinite(self.sigma_n) or self.sigma_n <= 0:
                raise ConfigError(f"{self.kind} slab needs a finite positive sigma_n")


@dataclass(frozen=True)
class NormalTarget:
    """Gaussian target posterior (flat slab, or Gaussian slab with k=1)."""

    mean: np.ndarray
    cov: np.ndarray

    @property
    def k(self):
        return self.mean.shape[0]

    def to_json(self):
        return {"kind": "normal", "mean": self.mean.tolist(), "cov": self.cov.tolist()}


@dataclass(frozen=True)
class LaplaceTarget:
    """Target posterior density proportional to
    exp(-0.5 (u - mean)^T cov^{-1} (u - mean) - ||u||_1 / sigma_n)."""

    mean: np.ndarray  # flat-case posterior mean
    cov: np.ndarray  # flat-case posterior covariance
    sigma_n: float

    @property
    def k(self):
        return self.mean.shape[0]

    def log_density_unnorm(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        d = u - self.mean
        prec = spd_inverse(self.cov)
        quad = np.einsum("ij,jk,ik->i", d, prec, d)
        out = -0.5 * quad - np.abs(u).sum(axis=1) / self.sigma_n
        return out if out.shape[0] > 1 else float(out[0])

    def to_json(self):
        return {
            "kind": "laplace",
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "sigma_n": self.sigma_n,
        }


def build_target_posterior(pp, g):
    """Exact posterior of the transformed target block for slab prior g."""
    if g.kind == "improper":
        return NormalTarget(mean=pp.projected_target.copy(), cov=pp.Sigma_k.copy())
    if g.kind == "gaussian":
        if pp.k != 1:
            raise ConfigError("gaussian slab is only supported for a single target coordinate")
        c = float(pp.X1k_gram[0, 0])  # squared norm of the target column
        s2 = g.sigma_n**2
        denom = c * s2 + 1.0
        xty = c * float(pp.projected_target[0])
        return NormalTarget(
            mean=np.array([s2 * xty / denom]), cov=np.array([[s2 / denom]])
        )
    return LaplaceTarget(
        mean=pp.projected_target.copy(), cov=pp.Sigma_k.copy(), sigma_n=float(g.sigma_n)
    )


def _sample_laplace_1d(tp, n_s, rng):
    # Exact draw: the density splits at zero into two Gaussian pieces with
    # means shifted by -/+ 1/(c*sigma_n); piece weights via the normal
    # log-CDF, piece draws via truncated normals.
    m = float(tp.mean[0])
    c = 1.0 / float(tp.cov[0, 0])
    s = np.sqrt(tp.cov[0, 0])
    shift = 1.0 / (c * tp.sigma_n)
    m_pos = m - shift
    m_neg = m + shift
    log_w_pos = -m / tp.sigma_n + log_ndtr(m_pos / s)
    log_w_neg = m / tp.sigma_n + log_ndtr(-m_neg / s)
    log_norm = np.logaddexp(log_w_pos, log_w_neg)
    p_pos = np.exp(log_w_pos - log_norm)
    take_pos = rng.random(n_s) < p_pos
    out = np.empty(n_s)
    n_pos = int(take_pos.sum())
    if n_pos:
        a = (0.0 - m_pos) / s
        out[take_pos] = truncnorm.rvs(a, np.inf, loc=m_pos, scale=s, size=n_pos, random_state=rng)
    if n_pos < n_s:
        b = (0.0 - m_neg) / s
        out[~take_pos] = truncnorm.rvs(
            -np.inf, b, loc=m_neg, scale=s, size=n_s - n_pos, random_state=rng
        )
    return out[:, None]


def _sample_laplace_mh(tp, n_s, rng):
    total = MH_BURN_IN + MH_THIN * n_s
    proposals = mvn_sample(tp.mean, tp.cov, rng, size=total)
    log_unif = np.log(rng.random(total))
    prop_l1 = np.abs(proposals).sum(axis=1)
    current = tp.mean.copy()
    current_l1 = float(np.abs(current).sum())
    out = np.empty((n_s, tp.k))
    accepted = 0
    kept = 0
    for t in range(total):
        if log_unif[t] <= -(prop_l1[t] - current_l1) / tp.sigma_n:
            current = proposals[t]
            current_l1 = float(prop_l1[t])
            accepted += 1
        if t >= MH_BURN_IN and (t - MH_BURN_IN) % MH_THIN == MH_THIN - 1:
            out[kept] = current
            kept += 1
    rate = accepted / total
    if rate < MH_MIN_ACCEPT:
        raise NumericalError(
            f"Metropolis-Hastings acceptance rate {rate:.4f} below {MH_MIN_ACCEPT}; "
            "consider a larger sigma_n"
        )
    return out


def sample_target(tp, n_s, rng):
    """n_s x k draws from the target posterior."""
    if n_s < 1:
        raise ConfigError("need n_s >= 1")
    if isinstance(tp, NormalTarget):
        draws = mvn_sample(tp.mean, tp.cov, rng, size=n_s)
        return draws
    if isinstance(tp, LaplaceTarget):
        if tp.k == 1:
            return _sample_laplace_1d(tp, n_s, rng)
        return _sample_laplace_mh(tp, n_s, rng)
    raise ConfigError(f"unknown target posterior {type(tp).__name__}")


def target_from_json(obj):
    kind = obj.get("kind")
    if kind == "normal":
        return NormalTarget(
            mean=np.asarray(obj["mean"], dtype=float), cov=np.asarray(obj["cov"], dtype=float)
        )
    if kind == "laplace":
        return LaplaceTarget(
            mean=np.asarray(obj["mean"], dtype=float),
            cov=np.asarray(obj["cov"], dtype=float),
            sigma_n=float(obj["sigma_n"]),
        )
    raise ConfigError(f"unknown target posterior kind {kind!r}")
