"""Frequency and RoCoF extraction from phasor angles or SV waveforms.

Both paths reduce the input to a phase-angle series, difference it into a
raw instantaneous frequency, and smooth with a constant-acceleration
Kalman smoother whose states are (frequency deviation, RoCoF). The SV
path demodulates at the nominal frequency first and low-passes with a
one-cycle moving average to kill the double-frequency image.
"""

import numpy as np


class InsufficientDataError(ValueError):
    pass


def estimate_frequency_rocof(signal, fs: float, f_nominal: float = 60.0,
                             kind: str = "phasor", q_rocof: float = 0.2,
                             r_freq: float | None = None):
    """Return (frequency Hz, RoCoF Hz/s) series of the input's length.

    ``kind='phasor'``: signal is a phasor angle series (rad, wrapping ok)
    referenced to the nominal rotating frame. ``kind='sv'``: signal is a
    raw waveform sampled at fs. Needs at least two nominal cycles.
    """
    signal = np.asarray(signal, dtype=float)
    if len(signal) < 2.0 * fs / f_nominal:
        raise InsufficientDataError(
            f"need at least 2 cycles ({2 * fs / f_nominal:.0f} samples at "
            f"fs={fs}), got {len(signal)}")

    trim = 0
    if kind == "phasor":
        phase = np.unwrap(signal)
    elif kind == "sv":
        phase, trim = _demodulated_phase(signal, fs, f_nominal)
    else:
        raise ValueError(f"unknown signal kind {kind!r}")

    dt = 1.0 / fs
    f_raw = np.empty(len(phase))
    f_raw[1:-1] = (phase[2:] - phase[:-2]) / (4.0 * np.pi * dt)
    f_raw[0] = f_raw[1]
    f_raw[-1] = f_raw[-2]

    if r_freq is None:
        # high-frequency content of f_raw estimates the measurement noise
        d = np.diff(f_raw)
        r_freq = max(float(np.var(d) / 2.0), 1e-12)

    f_dev, rocof = _const_accel_smoother(f_raw, dt, q_rocof, r_freq)
    freq = f_nominal + f_dev
    if trim:
        # the demodulation filter's edge region is unreliable; hold the
        # first and last interior values across it
        freq = np.concatenate([np.full(trim, freq[0]), freq,
                               np.full(trim, freq[-1])])
        rocof = np.concatenate([np.full(trim, rocof[0]), rocof,
                                np.full(trim, rocof[-1])])
    return freq, rocof


def _demodulated_phase(x, fs, f_nominal):
    t = np.arange(len(x)) / fs
    z = x * np.exp(-2j * np.pi * f_nominal * t)
    n_cyc = max(int(round(fs / f_nominal)), 1)
    kernel = np.ones(n_cyc) / n_cyc
    z_lp = np.convolve(z, kernel, mode="valid")   # drops n_cyc-1 samples
    phase = np.unwrap(np.angle(z_lp))
    # make the trim symmetric so the output aligns with the input grid
    if (len(x) - len(phase)) % 2 == 1:
        phase = phase[:-1]
    return phase, (len(x) - len(phase)) // 2


def _const_accel_smoother(f_raw, dt, q, r):
    """Forward KF + RTS smoother on states (freq deviation, rocof)."""
    a = np.array([[1.0, dt], [0.0, 1.0]])
    qm = q * np.array([[dt**3 / 3.0, dt**2 / 2.0], [dt**2 / 2.0, dt]])
    h = np.array([[1.0, 0.0]])
    T = len(f_raw)
    z = f_raw - f_raw[0]

    x = np.array([0.0, 0.0])
    p = np.diag([1.0, 10.0])
    xs_f = np.empty((T, 2))
    ps_f = np.empty((T, 2, 2))
    xs_p = np.empty((T, 2))
    ps_p = np.empty((T, 2, 2))
    for k in range(T):
        if k > 0:
            x = a @ x
            p = a @ p @ a.T + qm
        xs_p[k], ps_p[k] = x, p
        s = (h @ p @ h.T).item() + r
        kg = (p @ h.T / s).ravel()
        x = x + kg * (z[k] - x[0])
        p = p - np.outer(kg, h @ p)
        p = 0.5 * (p + p.T)
        xs_f[k], ps_f[k] = x, p

    xs = xs_f.copy()
    for k in range(T - 2, -1, -1):
        c = ps_f[k] @ a.T @ np.linalg.inv(ps_p[k + 1])
        xs[k] = xs_f[k] + c @ (xs[k + 1] - xs_p[k + 1])

    return xs[:, 0] + f_raw[0], xs[:, 1]
