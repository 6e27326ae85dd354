"""Filtering core: unscented transform, EKF/UKF steps, chi-square scoring.

Filters operate on a small discrete-model protocol: ``predict(x, u)``
advances the state one measurement interval (internally the same
trapezoidal stepper the simulator uses) and ``measure(x, u)`` evaluates
the measurement function; ``channel_names`` orders the output. The UKF
never forms a Jacobian; the EKF builds them by central finite
differences.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..models.errors import NumericError
from ..models.measurement import QUALITY_GOOD, MeasurementFrame

CLAMP_FLOOR = -1e-10


@dataclass
class FilterConfig:
    Q: np.ndarray
    R: np.ndarray
    x0: np.ndarray
    P0: np.ndarray
    alpha: float = 1e-3
    beta: float = 2.0
    kappa: float = 0.0
    gating: bool = False
    gate_level: float = 0.999

    def __post_init__(self):
        self.Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        self.R = np.atleast_2d(np.asarray(self.R, dtype=float))
        self.x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        self.P0 = np.atleast_2d(np.asarray(self.P0, dtype=float))
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        for name, m in (("Q", self.Q), ("R", self.R), ("P0", self.P0)):
            if not np.allclose(m, m.T, atol=1e-12):
                raise ValueError(f"{name} must be symmetric")
        if np.linalg.eigvalsh(self.R).min() <= 0:
            raise ValueError("R must be positive definite")


@dataclass
class EstimateResult:
    timestamp: float
    mean: np.ndarray
    cov: np.ndarray
    innovation: np.ndarray
    innovation_cov: np.ndarray
    chi2: float
    gated: tuple = ()
    channels_used: tuple = ()
    predicted: np.ndarray | None = None     # pre-update h(x_pred), all channels

    @property
    def dof(self) -> int:
        return len(self.innovation)


@dataclass
class SigmaPointSet:
    points: np.ndarray        # (2L+1, L)
    w_mean: np.ndarray
    w_cov: np.ndarray


def clamp_psd(p, strict=True):
    """Symmetrize and clamp tiny negative eigenvalues to zero.

    Eigenvalues below the clamp floor mean the matrix is genuinely
    indefinite; with ``strict`` that raises instead of papering over it.
    """
    p = 0.5 * (p + p.T)
    w, v = np.linalg.eigh(p)
    if w[0] >= 0.0:
        return p
    if strict and w[0] < CLAMP_FLOOR:
        raise NumericError(
            f"covariance indefinite beyond clamp tolerance (min eig {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.T


def _sqrt_psd(p):
    try:
        return np.linalg.cholesky(p), True
    except np.linalg.LinAlgError:
        fixed = clamp_psd(p, strict=True)
        # after clamping, a tiny jitter keeps Cholesky feasible
        jitter = 1e-15 * max(1.0, float(np.trace(fixed)))
        return np.linalg.cholesky(fixed + jitter * np.eye(len(fixed))), False


def unscented_transform(mean, cov, config=None, alpha=1e-3, beta=2.0,
                        kappa=0.0) -> SigmaPointSet:
    """Scaled sigma points reproducing (mean, cov) exactly.

    2L+1 points; the weighted sample mean and covariance of the returned
    set reconstruct the inputs to machine precision, which is what makes
    the UKF exact for affine maps.
    """
    if config is not None:
        alpha, beta, kappa = config.alpha, config.beta, config.kappa
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    ell = len(mean)
    lam = alpha**2 * (ell + kappa) - ell
    root, _ = _sqrt_psd((ell + lam) * cov)
    points = np.empty((2 * ell + 1, ell))
    points[0] = mean
    for i in range(ell):
        points[1 + i] = mean + root[:, i]
        points[1 + ell + i] = mean - root[:, i]
    w_mean = np.full(2 * ell + 1, 1.0 / (2.0 * (ell + lam)))
    w_cov = w_mean.copy()
    w_mean[0] = lam / (ell + lam)
    w_cov[0] = w_mean[0] + (1.0 - alpha**2 + beta)
    return SigmaPointSet(points=points, w_mean=w_mean, w_cov=w_cov)


def ut_moments(points, w_mean, w_cov, noise=None):
    # anchored at the center point: with weights summing to one this is
    # algebraically w_mean @ points but avoids large-weight cancellation
    p0 = points[0]
    mean = p0 + w_mean @ (points - p0)
    dev = points - mean
    cov = (dev.T * w_cov) @ dev
    if noise is not None:
        cov = cov + noise
    return mean, cov


def innovation_chi_square(nu, s) -> float:
    """nu' S^-1 nu via a Cholesky solve."""
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    s = np.atleast_2d(np.asarray(s, dtype=float))
    try:
        c = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as err:
        raise NumericError(f"singular innovation covariance: {err}") from err
    y = np.linalg.solve(c, nu)
    return float(y @ y)


def chi_square_threshold(dof: int, confidence: float) -> float:
    """Inverse chi-square CDF; the consistency-test trip level."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    return float(stats.chi2.ppf(confidence, dof))


def _measurement_rows(dm, z):
    """Full measurement vector (NaN where absent) and usable row indices."""
    names = list(dm.channel_names)
    if isinstance(z, MeasurementFrame):
        vec = np.full(len(names), np.nan)
        for i, nm in enumerate(names):
            if nm in z.channels and z.flag(nm) == QUALITY_GOOD:
                vec[i] = z.channels[nm]
    else:
        vec = np.asarray(z, dtype=float)
    used = np.flatnonzero(np.isfinite(vec))
    return vec, used


def ekf_step(dm, config: FilterConfig, prior, z, u=None,
             timestamp=0.0) -> EstimateResult:
    """Extended Kalman step with finite-difference Jacobians."""
    x, p = prior
    x = np.asarray(x, dtype=float)
    p = np.atleast_2d(np.asarray(p, dtype=float))

    f_jac = _fd_jacobian(lambda v: dm.predict(v, u), x)
    x_pred = np.asarray(dm.predict(x, u), dtype=float)
    p_pred = f_jac @ p @ f_jac.T + config.Q
    p_pred = 0.5 * (p_pred + p_pred.T)

    z_vec, used = _measurement_rows(dm, z)
    h_jac = _fd_jacobian(lambda v: dm.measure(v, u), x_pred)
    z_pred = np.asarray(dm.measure(x_pred, u), dtype=float)

    def update(rows):
        hk = h_jac[rows]
        nu = z_vec[rows] - z_pred[rows]
        s = hk @ p_pred @ hk.T + config.R[np.ix_(rows, rows)]
        return nu, s, hk

    return _linear_update(dm, config, x_pred, p_pred, z_vec, used, update,
                          timestamp, z_pred)


def ukf_step(dm, config: FilterConfig, prior, z, u=None,
             timestamp=0.0) -> EstimateResult:
    """Unscented Kalman step: sigma-point propagation, no Jacobians."""
    x, p = prior
    sp = unscented_transform(x, p, config)
    x_points = np.array([dm.predict(pt, u) for pt in sp.points])
    x_pred, p_pred = ut_moments(x_points, sp.w_mean, sp.w_cov, config.Q)

    # re-draw sigma points around the prediction so measurement moments
    # include the process noise just added
    sp2 = unscented_transform(x_pred, clamp_psd(p_pred, strict=False), config)
    z_points = np.array([dm.measure(pt, u) for pt in sp2.points])
    z_vec, used = _measurement_rows(dm, z)
    z_pred = sp2.w_mean @ z_points
    dev_x = sp2.points - x_pred
    dev_z = z_points - z_pred

    def update(rows):
        nu = z_vec[rows] - z_pred[rows]
        s = (dev_z[:, rows].T * sp2.w_cov) @ dev_z[:, rows] \
            + config.R[np.ix_(rows, rows)]
        pxz = (dev_x.T * sp2.w_cov) @ dev_z[:, rows]
        return nu, s, pxz

    return _sigma_update(dm, config, x_pred, p_pred, z_vec, used, update,
                         timestamp, z_pred)


def _gate_rows(config, nu, s, rows, names):
    """Channels whose standardized innovation exceeds the 1-dof gate."""
    g = np.sqrt(stats.chi2.ppf(config.gate_level, 1))
    std = np.abs(nu) / np.sqrt(np.diag(s))
    keep = std <= g
    gated = tuple(names[r] for r, k in zip(rows, keep) if not k)
    return rows[keep], gated


def _linear_update(dm, config, x_pred, p_pred, z_vec, used, update, timestamp,
                   z_pred=None):
    names = list(dm.channel_names)
    gated = ()
    if len(used):
        nu, s, hk = update(used)
        if config.gating:
            kept, gated = _gate_rows(config, nu, s, used, names)
            if len(kept) != len(used):
                used = kept
                if len(used):
                    nu, s, hk = update(used)
    if not len(used):
        return EstimateResult(timestamp, x_pred, clamp_psd(p_pred, strict=False),
                              np.zeros(0), np.zeros((0, 0)), 0.0, gated, (),
                              z_pred)
    k = p_pred @ hk.T @ _inv_spd(s)
    mean = x_pred + k @ nu
    cov = (np.eye(len(x_pred)) - k @ hk) @ p_pred
    cov = clamp_psd(cov, strict=False)
    chi2 = innovation_chi_square(nu, s)
    return EstimateResult(timestamp, mean, cov, nu, s, chi2, gated,
                          tuple(names[r] for r in used), z_pred)


def _sigma_update(dm, config, x_pred, p_pred, z_vec, used, update, timestamp,
                  z_pred=None):
    names = list(dm.channel_names)
    gated = ()
    if len(used):
        nu, s, pxz = update(used)
        if config.gating:
            kept, gated = _gate_rows(config, nu, s, used, names)
            if len(kept) != len(used):
                used = kept
                if len(used):
                    nu, s, pxz = update(used)
    if not len(used):
        return EstimateResult(timestamp, x_pred, clamp_psd(p_pred, strict=False),
                              np.zeros(0), np.zeros((0, 0)), 0.0, gated, (),
                              z_pred)
    k = pxz @ _inv_spd(s)
    mean = x_pred + k @ nu
    cov = p_pred - k @ s @ k.T
    cov = clamp_psd(cov, strict=False)
    chi2 = innovation_chi_square(nu, s)
    return EstimateResult(timestamp, mean, cov, nu, s, chi2, gated,
                          tuple(names[r] for r in used), z_pred)


def _inv_spd(s):
    try:
        c = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as err:
        raise NumericError(
            f"singular innovation covariance (cond={np.linalg.cond(s):.3e}, "
            f"min diag={np.min(np.diag(s)):.3e}): {err}") from err
    inv_c = np.linalg.solve(c, np.eye(len(s)))
    return inv_c.T @ inv_c


def _fd_jacobian(fn, x, eps=1e-6):
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fn(x), dtype=float)
    jac = np.empty((len(f0), len(x)))
    for j in range(len(x)):
        step = eps * max(1.0, abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += step
        xm[j] -= step
        jac[:, j] = (np.asarray(fn(xp)) - np.asarray(fn(xm))) / (2.0 * step)
    return jac
