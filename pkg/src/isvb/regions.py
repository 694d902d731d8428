"""Credible intervals and ellipsoids from posterior samples, plus the
chi-squared quantiles defining ellipsoid thresholds."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln, ndtri

from .errors import ConfigError, NumericalError
from .linalg import as_finite_array

_DEGENERATE_ATOL = 1e-12


@dataclass(frozen=True)
class CredibleInterval:
    lower: float
    upper: float
    level: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError("need lower <= upper")

    @property
    def length(self):
        return self.upper - self.lower

    def to_json(self):
        return {"kind": "interval", "lower": self.lower, "upper": self.upper, "level": self.level}


@dataclass(frozen=True)
class CredibleEllipsoid:
    """Region {v : (v - center)^T shape^{-1} (v - center) <= threshold}.

    ``active`` marks coordinates with positive variance; inactive
    coordinates (arising from degenerate samples or oracle regions on
    off-support targets) require exact equality to the center, and the
    quadratic form is evaluated on the active block only.
    """

    center: np.ndarray
    shape: np.ndarray
    threshold: float
    level: float
    active: np.ndarray = None
    regularized: bool = False

    def __post_init__(self):
        center = as_finite_array(self.center, "center", ndim=1)
        shape = as_finite_array(self.shape, "shape", ndim=2)
        k = center.shape[0]
        if shape.shape != (k, k):
            raise ValueError("shape matrix must be k x k")
        active = self.active
        if active is None:
            active = np.ones(k, dtype=bool)
        active = np.asarray(active, dtype=bool)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "active", active)

    @property
    def k(self):
        return self.center.shape[0]

    def to_json(self):
        return {
            "kind": "ellipsoid",
            "center": self.center.tolist(),
            "shape": self.shape.tolist(),
            "threshold": self.threshold,
            "level": self.level,
            "active": self.active.tolist(),
            "regularized": self.regularized,
        }


def chi2_cdf(x, k):
    """P(chi2_k <= x) via the regularized lower incomplete gamma."""
    return gammainc(k / 2.0, np.asarray(x, dtype=float) / 2.0)


def _chi2_logpdf(x, k):
    h = k / 2.0
    return (h - 1.0) * math.log(x) - x / 2.0 - h * math.log(2.0) - gammaln(h)


def chi2_quantile(gamma, k):
    """Inverse chi-squared CDF: Wilson-Hilferty start, Newton refinement."""
    if not 0.0 < gamma < 1.0:
        raise ConfigError(f"level must lie in (0,1), got {gamma}")
    if k < 1:
        raise ConfigError(f"need k >= 1, got {k}")
    z = ndtri(gamma)
    x = k * (1.0 - 2.0 / (9.0 * k) + z * math.sqrt(2.0 / (9.0 * k))) ** 3
    if x <= 0:
        x = 1e-8
    lo, hi = 0.0, math.inf
    for _ in range(200):
        f = float(chi2_cdf(x, k)) - gamma
        if f > 0:
            hi = x
        else:
            lo = x
        new = x - f * math.exp(-_chi2_logpdf(x, k))
        if not lo < new < hi:
            new = 0.5 * (lo + hi) if math.isfinite(hi) else 2.0 * x
        if abs(new - x) <= 1e-14 * (1.0 + abs(new)):
            x = new
            break
        x = new
    return float(x)


def interval_from_samples(samples, gamma):
    """Equal-tailed empirical-quantile interval at credibility ``gamma``
    (linear interpolation between order statistics)."""
    s = np.asarray(samples, dtype=float).reshape(-1)
    if s.size < 2:
        raise ValueError("need at least 2 samples")
    if not 0.0 < gamma < 1.0:
        raise ConfigError(f"level must lie in (0,1), got {gamma}")
    lo, hi = np.quantile(s, [(1.0 - gamma) / 2.0, (1.0 + gamma) / 2.0])
    return CredibleInterval(lower=float(lo), upper=float(hi), level=gamma)


def ellipsoid_from_samples(samples, gamma):
    """Ellipsoid from the sample mean and 1/n_s-normalized sample covariance
    with a chi-squared threshold. A singular covariance is ridge-regularized
    (flagged); coordinates with exactly zero variance become point
    constraints."""
    S = np.asarray(samples, dtype=float)
    if S.ndim == 1:
        S = S[:, None]
    n_s, k = S.shape
    if n_s <= k:
        raise ValueError(f"need more samples than dimensions, got {S.shape}")
    center = S.mean(axis=0)
    dev = S - center
    shape = dev.T @ dev / n_s
    active = np.diag(shape) > 0
    regularized = False
    if active.any():
        block = shape[np.ix_(active, active)]
        try:
            np.linalg.cholesky(block)
        except np.linalg.LinAlgError:
            ridge = 1e-12 * np.trace(block) / active.sum()
            block = block + ridge * np.eye(active.sum())
            shape = shape.copy()
            shape[np.ix_(active, active)] = block
            regularized = True
    return CredibleEllipsoid(
        center=center,
        shape=shape,
        threshold=chi2_quantile(gamma, k),
        level=gamma,
        active=active,
        regularized=regularized,
    )


def contains(region, point):
    """Closed-set membership: boundary points are contained."""
    if isinstance(region, CredibleInterval):
        v = float(np.asarray(point).reshape(()))
        return region.lower <= v <= region.upper
    v = np.asarray(point, dtype=float).reshape(-1)
    if v.shape[0] != region.k:
        raise ValueError(f"point has dimension {v.shape[0]}, region has {region.k}")
    d = v - region.center
    inactive = ~region.active
    if np.any(np.abs(d[inactive]) > _DEGENERATE_ATOL):
        return False
    if not region.active.any():
        return True
    a = region.active
    block = region.shape[np.ix_(a, a)]
    try:
        sol = np.linalg.solve(block, d[a])
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular shape matrix in membership query") from exc
    return float(d[a] @ sol) <= region.threshold


def volume_proxy(region):
    """Quantity proportional to the region volume: sqrt(det shape) times
    threshold^(k/2) for ellipsoids, the length for intervals. Degenerate
    ellipsoids have zero volume."""
    if isinstance(region, CredibleInterval):
        return region.length
    if not region.active.all():
        return 0.0
    det = np.linalg.det(region.shape)
    if det < 0:
        det = 0.0
    return float(math.sqrt(det) * region.threshold ** (region.k / 2.0))


def region_from_json(obj):
    if obj.get("kind") == "interval":
        return CredibleInterval(lower=obj["lower"], upper=obj["upper"], level=obj["level"])
    if obj.get("kind") == "ellipsoid":
        return CredibleEllipsoid(
            center=np.asarray(obj["center"], dtype=float),
            shape=np.asarray(obj["shape"], dtype=float),
            threshold=float(obj["threshold"]),
            level=float(obj["level"]),
            active=np.asarray(obj["active"], dtype=bool),
            regularized=bool(obj.get("regularized", False)),
        )
    raise ConfigError(f"unknown region kind {obj.get('kind')!r}")
