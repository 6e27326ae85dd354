"""Linear-Gaussian benchmark: filters against pole-placed observers.

A lightly damped discrete oscillator with position measurements is the
common test bed: filters know the noise statistics, the observer knows
only its gain. The helpers here build the system, simulate it (with
optional outliers) and compute NEES/RMSE so the comparison claims can be
asserted as tests.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .kalman import FilterConfig, ekf_step, ukf_step
from .observer import ObserverDesign, observer_step


@dataclass
class BenchSystem:
    a: np.ndarray
    c: np.ndarray
    q: np.ndarray
    r: np.ndarray
    dt: float

    @property
    def n(self):
        return self.a.shape[0]


class LinearDiscreteModel:
    """Filter-protocol wrapper around x+ = A x (+ B u), z = C x."""

    def __init__(self, a, c, b=None, names=None):
        self.a = np.atleast_2d(a)
        self.c = np.atleast_2d(c)
        self.b = b
        self.channel_names = tuple(names or
                                   (f"z{i}" for i in range(self.c.shape[0])))

    def predict(self, x, u=None):
        out = self.a @ x
        if u is not None and self.b is not None:
            out = out + self.b @ np.atleast_1d(u)
        return out

    def measure(self, x, u=None):
        return self.c @ x


def bench_system(dt=0.05, f_hz=0.8, zeta=0.08, q_scale=2e-4,
                 r_scale=1e-2) -> BenchSystem:
    w = 2.0 * np.pi * f_hz
    a_cont = np.array([[0.0, 1.0], [-w * w, -2.0 * zeta * w]])
    a = expm(a_cont * dt)
    c = np.array([[1.0, 0.0]])
    q = q_scale * np.diag([dt, dt])
    r = np.array([[r_scale**2]])
    return BenchSystem(a=a, c=c, q=q, r=r, dt=dt)


def simulate_bench(sys: BenchSystem, steps, rng, x0=None, outlier_prob=0.0,
                   outlier_factor=20.0):
    n = sys.n
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    lq = np.linalg.cholesky(sys.q)
    lr = np.linalg.cholesky(sys.r)
    xs = np.empty((steps, n))
    zs = np.empty((steps, sys.c.shape[0]))
    for k in range(steps):
        x = sys.a @ x + lq @ rng.standard_normal(n)
        z = sys.c @ x + lr @ rng.standard_normal(sys.c.shape[0])
        if outlier_prob > 0 and rng.random() < outlier_prob:
            z = z + outlier_factor * lr @ rng.standard_normal(sys.c.shape[0])
        xs[k] = x
        zs[k] = z
    return xs, zs


def run_filter(sys: BenchSystem, zs, x0, p0, kind="ekf", gating=False):
    model = LinearDiscreteModel(sys.a, sys.c)
    cfg = FilterConfig(Q=sys.q, R=sys.r, x0=x0, P0=p0, gating=gating)
    step = ekf_step if kind == "ekf" else ukf_step
    prior = (cfg.x0, cfg.P0)
    means = np.empty((len(zs), sys.n))
    covs = np.empty((len(zs), sys.n, sys.n))
    for k, z in enumerate(zs):
        res = step(model, cfg, prior, z)
        prior = (res.mean, res.cov)
        means[k] = res.mean
        covs[k] = res.cov
    return means, covs


def run_observer_series(design: ObserverDesign, zs, x0):
    x = np.asarray(x0, dtype=float)
    means = np.empty((len(zs), len(x0)))
    for k, z in enumerate(zs):
        x = observer_step(design, x, z)
        means[k] = x
    return means


def nees_series(truth, means, covs):
    e = truth - means
    return np.einsum("ki,kij,kj->k", e, np.linalg.inv(covs), e)


def rmse(truth, means, skip=0):
    e = truth[skip:] - means[skip:]
    return float(np.sqrt(np.mean(np.sum(e**2, axis=1))))
