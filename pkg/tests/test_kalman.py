"""Filter step checks against a textbook linear Kalman oracle."""

import numpy as np
import pytest

from dselab.estimation import (
    FilterConfig,
    LinearDiscreteModel,
    chi_square_threshold,
    ekf_step,
    innovation_chi_square,
    ukf_step,
)
from dselab.models.errors import NumericError


def _textbook_kf(a, c, q, r, zs, x0, p0):
    # independent reference implementation, kept deliberately primitive
    x, p = np.asarray(x0, float), np.asarray(p0, float)
    means, covs = [], []
    for z in zs:
        x = a @ x
        p = a @ p @ a.T + q
        s = c @ p @ c.T + r
        k = p @ c.T @ np.linalg.inv(s)
        x = x + k @ (np.atleast_1d(z) - c @ x)
        p = (np.eye(len(x)) - k @ c) @ p
        means.append(x.copy())
        covs.append(p.copy())
    return np.array(means), np.array(covs)


A = np.array([[1.0, 0.1], [-0.05, 0.98]])
C = np.array([[1.0, 0.0]])
Q = np.diag([1e-5, 1e-5])
R = np.array([[1e-2]])


def _measurements(steps=60, seed=3):
    rng = np.random.default_rng(seed)
    x = np.array([1.0, 0.0])
    zs = []
    for _ in range(steps):
        x = A @ x + rng.normal(0, 1e-3, 2)
        zs.append(C @ x + rng.normal(0, 0.1, 1))
    return zs


@pytest.mark.parametrize("step", [ekf_step, ukf_step])
def test_linear_model_matches_textbook_recursion(step):
    zs = _measurements()
    model = LinearDiscreteModel(A, C)
    cfg = FilterConfig(Q=Q, R=R, x0=[0.0, 0.0], P0=np.eye(2))
    prior = (cfg.x0, cfg.P0)
    means, covs = [], []
    for z in zs:
        res = step(model, cfg, prior, z)
        prior = (res.mean, res.cov)
        means.append(res.mean)
        covs.append(res.cov)
    want_m, want_p = _textbook_kf(A, C, Q, R, zs, [0.0, 0.0], np.eye(2))
    assert np.max(np.abs(np.array(means) - want_m)) < 1e-9
    assert np.max(np.abs(np.array(covs) - want_p)) < 1e-9


def test_ekf_and_ukf_agree_on_linear_model():
    zs = _measurements(seed=11)
    model = LinearDiscreteModel(A, C)
    cfg = FilterConfig(Q=Q, R=R, x0=[0.5, -0.2], P0=0.5 * np.eye(2))
    pe = pu = (cfg.x0, cfg.P0)
    for z in zs:
        re_ = ekf_step(model, cfg, pe, z)
        ru = ukf_step(model, cfg, pu, z)
        pe, pu = (re_.mean, re_.cov), (ru.mean, ru.cov)
        assert np.max(np.abs(re_.mean - ru.mean)) < 1e-8
        assert np.max(np.abs(re_.cov - ru.cov)) < 1e-8


def test_exact_model_and_measurement_recovers_truth():
    # vanishing Q and (numerically) vanishing R with a full-state
    # measurement: the posterior collapses onto the truth.
    truth = np.array([0.7, -0.3])
    model = LinearDiscreteModel(np.eye(2), np.eye(2))
    cfg = FilterConfig(Q=np.zeros((2, 2)), R=1e-16 * np.eye(2),
                       x0=[0.0, 0.0], P0=np.eye(2))
    res = ekf_step(model, cfg, (cfg.x0, cfg.P0), truth)
    assert np.max(np.abs(res.mean - truth)) < 1e-9


def test_static_state_variance_strictly_decreasing():
    model = LinearDiscreteModel(np.eye(1), np.eye(1))
    cfg = FilterConfig(Q=np.zeros((1, 1)), R=np.eye(1), x0=[0.0], P0=np.eye(1))
    prior = (cfg.x0, cfg.P0)
    variances = []
    for _ in range(10):
        res = ukf_step(model, cfg, prior, np.array([1.0]))
        prior = (res.mean, res.cov)
        variances.append(res.cov[0, 0])
    assert all(b < a for a, b in zip(variances, variances[1:]))


def test_chi_square_statistic_and_threshold():
    assert innovation_chi_square(np.zeros(3), np.eye(3)) == 0.0
    assert innovation_chi_square([3.0, 4.0], np.eye(2)) == pytest.approx(25.0)
    # dof=2 closed form: -2 ln(1 - p)
    want = -2.0 * np.log(1.0 - 0.999)
    assert chi_square_threshold(2, 0.999) == pytest.approx(want, abs=1e-9)
    assert chi_square_threshold(2, 0.999) == pytest.approx(13.8155, abs=1e-3)
    with pytest.raises(NumericError):
        innovation_chi_square([1.0, 1.0], np.zeros((2, 2)))
    with pytest.raises(ValueError):
        chi_square_threshold(0, 0.5)
    with pytest.raises(ValueError):
        chi_square_threshold(2, 1.5)


def test_missing_channels_drop_rows():
    model = LinearDiscreteModel(np.eye(2), np.eye(2))
    cfg = FilterConfig(Q=1e-6 * np.eye(2), R=np.eye(2), x0=[0.0, 0.0],
                       P0=np.eye(2))
    res = ekf_step(model, cfg, (cfg.x0, cfg.P0), np.array([1.0, np.nan]))
    assert res.dof == 1
    assert res.channels_used == ("z0",)


def test_gating_neutrality_no_outliers():
    # clean Gaussian residuals at gate level 0.999: gated sets empty in
    # at least 99% of steps
    rng = np.random.default_rng(42)
    model = LinearDiscreteModel(A, C)
    cfg = FilterConfig(Q=Q, R=R, x0=[0.0, 0.0], P0=np.eye(2), gating=True)
    prior = (cfg.x0, cfg.P0)
    x = np.array([0.0, 0.0])
    empty = 0
    steps = 600
    for _ in range(steps):
        x = A @ x + np.linalg.cholesky(Q) @ rng.standard_normal(2)
        z = C @ x + 0.1 * rng.standard_normal(1)
        res = ukf_step(model, cfg, prior, z)
        prior = (res.mean, res.cov)
        empty += not res.gated
    assert empty / steps >= 0.99


def test_gating_rejects_gross_outlier():
    model = LinearDiscreteModel(np.eye(1), np.eye(1))
    cfg = FilterConfig(Q=1e-6 * np.eye(1), R=1e-4 * np.eye(1), x0=[0.0],
                       P0=1e-4 * np.eye(1), gating=True)
    res = ukf_step(model, cfg, (cfg.x0, cfg.P0), np.array([50.0]))
    assert res.gated == ("z0",)
    assert abs(res.mean[0]) < 1.0
