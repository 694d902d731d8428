import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtri

from isvb.errors import ConfigError
from isvb.regions import (
    CredibleEllipsoid,
    CredibleInterval,
    chi2_cdf,
    chi2_quantile,
    contains,
    ellipsoid_from_samples,
    interval_from_samples,
    region_from_json,
    volume_proxy,
)


def test_interval_order_statistics():
    iv = interval_from_samples(np.arange(1.0, 101.0), 0.9)
    assert abs(iv.lower - 5.95) < 1e-12
    assert abs(iv.upper - 95.05) < 1e-12


def test_interval_degenerate_and_extreme_level():
    iv = interval_from_samples(np.full(50, 2.5), 0.9)
    assert iv.lower == iv.upper == 2.5 and iv.length == 0.0
    samples = np.random.default_rng(0).standard_normal(1000)
    iv = interval_from_samples(samples, 1 - 1e-12)
    assert abs(iv.lower - samples.min()) < 1e-9
    assert abs(iv.upper - samples.max()) < 1e-9
    with pytest.raises(ValueError):
        interval_from_samples([1.0], 0.9)


def test_chi2_quantile_known_values():
    assert abs(chi2_quantile(0.95, 2) - 5.991464547107979) < 1e-8
    assert abs(chi2_quantile(0.5, 2) - 2 * np.log(2.0)) < 1e-10
    assert abs(chi2_quantile(0.95, 1) - ndtri(0.975) ** 2) < 1e-10


def test_chi2_round_trip():
    for k in range(1, 11):
        for g in np.arange(0.01, 1.0, 0.01):
            assert abs(chi2_cdf(chi2_quantile(g, k), k) - g) < 1e-9


@settings(max_examples=50, deadline=None)
@given(
    g=st.floats(min_value=0.02, max_value=0.98),
    k=st.integers(min_value=1, max_value=10),
)
def test_chi2_monotone(g, k):
    assert chi2_quantile(g + 0.01, k) > chi2_quantile(g, k)
    assert chi2_quantile(g, k + 1) > chi2_quantile(g, k)


def test_chi2_validation():
    with pytest.raises(ConfigError):
        chi2_quantile(0.0, 2)
    with pytest.raises(ConfigError):
        chi2_quantile(0.95, 0)


def test_ellipsoid_from_gaussian_samples():
    rng = np.random.default_rng(1)
    draws = rng.standard_normal((100_000, 2))
    reg = ellipsoid_from_samples(draws, 0.95)
    assert np.linalg.norm(reg.shape - np.eye(2)) < 0.05
    assert contains(reg, np.zeros(2))
    assert abs(reg.threshold - chi2_quantile(0.95, 2)) < 1e-12


def test_ellipsoid_k1_agrees_with_symmetric_interval():
    rng = np.random.default_rng(2)
    draws = 3.0 + 0.5 * rng.standard_normal((20_000, 1))
    reg = ellipsoid_from_samples(draws, 0.95)
    halfwidth = np.sqrt(reg.shape[0, 0] * reg.threshold)
    iv = interval_from_samples(draws[:, 0], 0.95)
    assert abs((reg.center[0] - halfwidth) - iv.lower) < 0.02
    assert abs((reg.center[0] + halfwidth) - iv.upper) < 0.02
    assert contains(reg, np.array([3.0])) and contains(iv, 3.0)


def test_ellipsoid_degenerate_samples_point_membership():
    draws = np.tile([1.0, -2.0], (50, 1))
    reg = ellipsoid_from_samples(draws, 0.95)
    assert contains(reg, np.array([1.0, -2.0]))
    assert not contains(reg, np.array([1.0, -2.0 + 1e-6]))
    assert volume_proxy(reg) == 0.0


def test_contains_conventions():
    reg = CredibleEllipsoid(
        center=np.zeros(2), shape=np.eye(2), threshold=chi2_quantile(0.9, 2), level=0.9
    )
    assert contains(reg, np.zeros(2))
    assert not contains(reg, np.array([100.0, 0.0]))
    boundary = np.array([np.sqrt(reg.threshold), 0.0])
    assert contains(reg, boundary)  # closed set
    iv = CredibleInterval(lower=-1.0, upper=1.0, level=0.9)
    assert contains(iv, 1.0) and contains(iv, -1.0) and not contains(iv, 1.0 + 1e-12)


def test_volume_proxy_scaling():
    reg = CredibleEllipsoid(
        center=np.zeros(2), shape=np.eye(2), threshold=chi2_quantile(0.95, 2), level=0.95
    )
    assert abs(volume_proxy(reg) - reg.threshold) < 1e-12  # det = 1
    scaled = CredibleEllipsoid(
        center=np.zeros(2), shape=4.0 * np.eye(2), threshold=reg.threshold, level=0.95
    )
    assert abs(volume_proxy(scaled) / volume_proxy(reg) - 4.0) < 1e-12  # c^k with c = 2
    assert volume_proxy(reg) / volume_proxy(reg) == 1.0


def test_region_json_roundtrip():
    reg = CredibleEllipsoid(
        center=np.array([1.0, 2.0]),
        shape=np.array([[2.0, 0.3], [0.3, 1.0]]),
        threshold=5.99,
        level=0.95,
    )
    back = region_from_json(reg.to_json())
    assert np.allclose(back.center, reg.center) and np.allclose(back.shape, reg.shape)
    iv = CredibleInterval(lower=-1.0, upper=2.0, level=0.9)
    back = region_from_json(iv.to_json())
    assert back == iv
