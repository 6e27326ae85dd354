"""Unscented transform checks: reconstruction, affine exactness, MC oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dselab.estimation import unscented_transform, ut_moments
from dselab.models.errors import NumericError


def test_scalar_standard_normal_points_symmetric():
    sp = unscented_transform([0.0], [[1.0]])
    pts = sp.points.ravel()
    assert pts[0] == 0.0
    assert pts[1] == pytest.approx(-pts[2], abs=1e-14)
    mean, cov = ut_moments(sp.points, sp.w_mean, sp.w_cov)
    assert mean[0] == pytest.approx(0.0, abs=1e-12)
    assert cov[0, 0] == pytest.approx(1.0, rel=1e-12)
    assert sp.w_mean.sum() == pytest.approx(1.0, abs=1e-12)


def test_affine_map_exact_mean_and_variance():
    sp = unscented_transform([2.0], [[4.0]])
    propagated = 3.0 * sp.points + 1.0
    mean, cov = ut_moments(propagated, sp.w_mean, sp.w_cov)
    assert mean[0] == pytest.approx(7.0, rel=1e-12)
    assert cov[0, 0] == pytest.approx(36.0, rel=1e-10)


def test_quadratic_against_monte_carlo_oracle():
    # 2-D Gaussian pushed through a quadratic; UT mean within 5% of a
    # 1e6-sample Monte Carlo estimate.
    mean = np.array([0.5, -0.3])
    cov = np.array([[0.04, 0.01], [0.01, 0.09]])

    def quad(p):
        return np.array([p[0]**2 + 0.5 * p[1], p[0] * p[1] + 1.0])

    sp = unscented_transform(mean, cov, alpha=1.0, kappa=1.0)
    ut_mean, _ = ut_moments(np.array([quad(p) for p in sp.points]),
                            sp.w_mean, sp.w_cov)
    rng = np.random.default_rng(123)
    samples = rng.multivariate_normal(mean, cov, size=1_000_000)
    mc = np.array([samples[:, 0]**2 + 0.5 * samples[:, 1],
                   samples[:, 0] * samples[:, 1] + 1.0]).mean(axis=1)
    assert np.all(np.abs(ut_mean - mc) <= 0.05 * np.maximum(np.abs(mc), 0.1))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10_000))
def test_affine_exactness_property(dim, seed):
    # For any affine map the transformed weighted moments equal the
    # analytic push-forward to 1e-10 at unit scaling. The filter-default
    # alpha=1e-3 carries +-1e6 weights, which amplify the rounding of the
    # stored mapped points; that path is held to a correspondingly looser
    # bound.
    rng = np.random.default_rng(seed)
    mean = rng.normal(size=dim)
    root = rng.normal(size=(dim, dim)) * 0.5
    cov = root @ root.T + 0.1 * np.eye(dim)
    a = rng.normal(size=(dim, dim))
    b = rng.normal(size=dim)
    want_mean = a @ mean + b
    want_cov = a @ cov @ a.T
    cov_scale = max(np.abs(want_cov).max(), 1.0)
    mean_scale = max(np.abs(want_mean).max(), 1.0)

    for alpha, tol in ((1.0, 1e-10), (1e-3, 3e-9)):
        sp = unscented_transform(mean, cov, alpha=alpha)
        mapped = sp.points @ a.T + b
        got_mean, got_cov = ut_moments(mapped, sp.w_mean, sp.w_cov)
        assert np.max(np.abs(got_mean - want_mean)) <= tol * mean_scale
        assert np.max(np.abs(got_cov - want_cov)) <= tol * cov_scale


def test_reconstruction_exactness_invariant():
    rng = np.random.default_rng(5)
    cov = rng.normal(size=(5, 5))
    cov = cov @ cov.T + np.eye(5)
    mean = rng.normal(size=5)
    sp = unscented_transform(mean, cov)
    got_mean, got_cov = ut_moments(sp.points, sp.w_mean, sp.w_cov)
    assert np.max(np.abs(got_mean - mean)) <= 1e-12 * max(1, np.abs(mean).max())
    assert np.max(np.abs(got_cov - cov)) <= 1e-12 * np.abs(cov).max()


def test_indefinite_covariance_beyond_clamp_raises():
    with pytest.raises(NumericError):
        unscented_transform([0.0, 0.0], [[1.0, 0.0], [0.0, -1.0]])


def test_tiny_negative_eigenvalue_is_clamped():
    # within the clamp tolerance: no error, PSD square root used
    cov = np.array([[1.0, 0.0], [0.0, -5e-11]])
    sp = unscented_transform([0.0, 0.0], cov)
    assert np.isfinite(sp.points).all()
