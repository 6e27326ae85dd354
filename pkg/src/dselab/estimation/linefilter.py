"""Sampled-value line-zone filter model shared by relaying and remote
terminal reconstruction.

States: the pi-cascade ladder of the healthy line plus the two terminal
injection currents, each modeled as a nominal-frequency harmonic pair
(i, i_quad) so the filter extrapolates sinusoidal boundary conditions
between corrections; frequency offsets and amplitude changes are absorbed
by the pair's process noise. This closes the KCL at the terminals and
makes all four terminal quantities static functions of the state. The
model is affine (in fact linear), so a window of samples can be filtered
either by stepping ``ukf_step`` or by the batch kernel; both produce the
same numbers and the equivalence is pinned by a test.
"""

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .. import _kernels
from ..models.line import LineModel
from ..models.measurement import QUALITY_GOOD
from .kalman import FilterConfig, ukf_step

CHANNELS = ("V_local", "I_local", "V_remote", "I_remote")


class LineFilterModel:
    """Discrete affine model of the healthy line zone at the SV rate."""

    def __init__(self, line: LineModel, dt: float, nominal_freq: float = 60.0,
                 q_line: float = 1e-8, q_inj: float = 2e-5,
                 sigma: float = 0.01):
        self.line = line
        self.dt = dt
        n = line.state_dim
        a_line, b_line = line.state_matrices()
        dim = n + 4
        w = 2.0 * np.pi * nominal_freq
        a = np.zeros((dim, dim))
        a[:n, :n] = a_line
        a[:n, n] = b_line[:, 0]         # local injection drives node 0
        a[:n, n + 2] = b_line[:, 1]     # remote injection drives node n
        for base in (n, n + 2):
            a[base, base + 1] = w       # harmonic pair per terminal
            a[base + 1, base] = -w
        self.n_line = n
        self.dim = dim
        self.i_local = n
        self.i_remote = n + 2
        self.channel_names = CHANNELS
        self.state_labels = tuple(
            "capacitor-voltage" if k % 2 == 0 else "inductor-current"
            for k in range(n)) + ("inductor-current",) * 4

        lhs = np.eye(dim) - 0.5 * dt * a
        lu = lu_factor(lhs)
        self.F = lu_solve(lu, np.eye(dim) + 0.5 * dt * a)
        self.G = np.zeros((dim, 1))

        h = np.zeros((4, dim))
        h[0, 0] = 1.0                   # V_local
        h[1, self.i_local] = 1.0        # I_local injection
        h[2, n - 1] = 1.0               # V_remote
        h[3, self.i_remote] = 1.0       # I_remote injection
        self.H = h

        q = np.full(dim, q_line)
        q[n:] = q_inj
        self.Q = np.diag(q)
        self.R = np.eye(4) * sigma**2
        self.sigma = sigma

    def predict(self, x, u=None):
        return self.F @ x

    def measure(self, x, u=None):
        return self.H @ x

    def default_config(self, x0=None, p0_scale=1.0, gating=False,
                       gate_level=0.999) -> FilterConfig:
        x0 = np.zeros(self.dim) if x0 is None else np.asarray(x0, dtype=float)
        p0 = np.eye(self.dim) * p0_scale
        return FilterConfig(Q=self.Q, R=self.R, x0=x0, P0=p0,
                            gating=gating, gate_level=gate_level)

    def warm_start(self, stream, nominal_freq: float = 60.0, **cfg_kw):
        """Config whose x0 comes from chaining one cycle of local phasors.

        A cold (zero) start excites the line modes of the predictor; on a
        lossless line those sit on the unit circle and ring through the
        estimates for a long time. Fitting the local V/I phasors over the
        first cycle and propagating them node by node through the ladder
        reproduces the pre-event interior state, so the filter starts
        converged.
        """
        w = 2.0 * np.pi * nominal_freq
        n_fit = max(int(round(1.0 / (nominal_freq * self.dt))), 4)
        t = stream.times[:n_fit]
        v0 = _fit_phasor(stream.channels["V_local"][:n_fit], t, w)
        i0 = _fit_phasor(stream.channels["I_local"][:n_fit], t, w)

        r_sec, l_sec, _ = self.line.section_rlc()
        c_node = self.line.node_capacitances()
        z_ser = complex(r_sec, w * l_sec)
        ph = np.zeros(self.dim, dtype=complex)
        ph[0] = v0
        ph[self.i_local] = i0
        ph[self.i_local + 1] = 1j * i0
        i_in = i0                        # injection entering the current node
        for k in range(self.line.n_sections):
            i_sec = i_in - 1j * w * c_node[k] * ph[2 * k]
            ph[2 * k + 1] = i_sec
            ph[2 * k + 2] = ph[2 * k] - z_ser * i_sec
            i_in = i_sec
        v_n = ph[self.n_line - 1]
        i_rem = 1j * w * c_node[-1] * v_n - i_in
        ph[self.i_remote] = i_rem
        ph[self.i_remote + 1] = 1j * i_rem
        # the config's x0 is the prior one step before the first sample
        x0 = (ph * np.exp(1j * w * (stream.times[0] - self.dt))).real
        cfg_kw.setdefault("p0_scale", 1e-2)
        return self.default_config(x0=x0, **cfg_kw)


def _fit_phasor(x, times, w):
    """Least-squares cosine-referenced phasor: x ~ Re(P e^{jwt})."""
    basis = np.column_stack([np.cos(w * times), -np.sin(w * times)])
    re, im = np.linalg.lstsq(basis, np.asarray(x, dtype=float), rcond=None)[0]
    return complex(re, im)


def run_line_filter(model: LineFilterModel, stream, channels=None,
                    config: FilterConfig | None = None, use_kernel=True):
    """Filter a whole SV stream through the line-zone model.

    ``channels`` restricts which stream channels are assimilated (the
    remote-terminal application measures only the local pair). Returns a
    dict with means, covs, zpred, innov, chi2 and dof arrays; rows follow
    the stream. Missing-quality samples are dropped row-wise.
    """
    channels = list(channels or model.channel_names)
    config = config or model.default_config()
    T = len(stream)
    z = np.zeros((T, 4))
    miss = np.ones((T, 4), dtype=np.uint8)
    for i, nm in enumerate(model.channel_names):
        if nm in channels and nm in stream.channels:
            z[:, i] = stream.channels[nm]
            miss[:, i] = stream.quality[nm] != QUALITY_GOOD

    if use_kernel and not config.gating:
        u_mid = np.zeros((T, 1))
        return _kernels.kf_affine_run(model.F, model.G, u_mid, model.H,
                                      config.Q, config.R, config.x0,
                                      config.P0, z, miss)

    means = np.empty((T, model.dim))
    covs = np.empty((T, model.dim, model.dim))
    zpred = np.empty((T, 4))
    innov = np.full((T, 4), np.nan)
    chi2 = np.zeros(T)
    dof = np.zeros(T, dtype=int)
    prior = (config.x0, config.P0)
    name_to_row = {nm: i for i, nm in enumerate(model.channel_names)}
    for k in range(T):
        z_row = z[k].copy()
        z_row[miss[k] == 1] = np.nan
        res = ukf_step(model, config, prior, z_row, None,
                       timestamp=float(stream.times[k]))
        prior = (res.mean, res.cov)
        means[k] = res.mean
        covs[k] = res.cov
        zpred[k] = res.predicted
        chi2[k] = res.chi2
        dof[k] = res.dof
        for nm, val in zip(res.channels_used, res.innovation):
            innov[k, name_to_row[nm]] = val
    return {"means": means, "covs": covs, "zpred": zpred, "innov": innov,
            "chi2": chi2, "dof": dof}
