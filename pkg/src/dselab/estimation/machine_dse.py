"""Decentralized per-machine discrete models for PMU-rate filtering.

The machine is predicted with the measured terminal voltage phasor held
over the frame interval (the standard decentralized formulation: the bus
voltage carries the rest of the grid into the local model). Measurements
are the frame's P, Q and frequency channels.
"""

from dataclasses import dataclass

import numpy as np

from ..models import machine as mach


@dataclass
class MachineDseInputs:
    """Per-frame exogenous data: terminal voltage phasor and inputs.

    ``v_bus_prev`` is the previous frame's voltage; the predictor
    interpolates between the two across the frame interval (a held
    end-frame voltage biases the energy exchange during swings, which
    parameter tracks pick up as a drift).
    """

    v_bus: complex
    mech: mach.MachineInput
    v_bus_prev: complex | None = None


class MachineDseModel:
    """Discrete model over one machine's states at the PMU frame rate.

    ``predict`` integrates the machine ODE with trapezoidal substeps,
    ``measure`` returns (P, Q, freq) at the held terminal voltage.
    """

    def __init__(self, params: mach.MachineParams, variant: str,
                 frame_dt: float, nominal_freq: float = 60.0,
                 emf: float | None = None, substeps: int = 2,
                 channel_prefix: str = "", use_rocof: bool = False):
        self.params = params
        self.variant = variant
        self.dt = frame_dt
        self.f_nom = nominal_freq
        self.emf = emf
        self.substeps = substeps
        self.use_rocof = use_rocof
        pre = channel_prefix
        self.channel_names = (f"{pre}P", f"{pre}Q", f"{pre}freq")
        if use_rocof:
            self.channel_names += (f"{pre}rocof",)
        self.n_states = 2 if variant == mach.CLASSICAL else 4
        self.n_phys = self.n_states
        self.state_labels = ("angle", "speed-deviation") + (
            () if self.n_states == 2 else ("flux-emf", "flux-emf"))

    def _params_for(self, x):
        return self.params

    def predict(self, x, u: MachineDseInputs):
        x = np.asarray(x, dtype=float).copy()
        h = self.dt / self.substeps
        v0 = u.v_bus_prev if u.v_bus_prev is not None else u.v_bus
        v1 = u.v_bus
        for s in range(self.substeps):
            ua = MachineDseInputs(_lerp(v0, v1, s / self.substeps), u.mech)
            ub = MachineDseInputs(_lerp(v0, v1, (s + 1) / self.substeps), u.mech)
            f0 = self._full_derivs(x, ua)
            x1 = x + h * f0
            for _ in range(30):
                f1 = self._full_derivs(x1, ub)
                x_new = x + 0.5 * h * (f0 + f1)
                if np.max(np.abs(x_new - x1)) <= 1e-12:
                    x1 = x_new
                    break
                x1 = x_new
            x = x1
        return x

    def _full_derivs(self, x, u):
        st = mach.MachineState.from_array(x[:self.n_phys], self.variant,
                                          emf=self.emf)
        return mach.machine_derivatives(st, u.v_bus, u.mech,
                                        self._params_for(x), self.variant)

    def measure(self, x, u: MachineDseInputs):
        st = mach.MachineState.from_array(x[:self.n_phys], self.variant,
                                          emf=self.emf)
        params = self._params_for(x)
        i = mach.terminal_current(st, u.v_bus, params, self.variant)
        s = u.v_bus * np.conj(i)
        out = [s.real, s.imag, self.f_nom * (1.0 + st.domega)]
        if self.use_rocof:
            # RoCoF is the swing equation read back through the model, so
            # it carries direct inertia sensitivity at every imbalance
            d = mach.machine_derivatives(st, u.v_bus, u.mech, params,
                                         self.variant)
            out.append(self.f_nom * d[1])
        return np.array(out)


def _lerp(v0, v1, tau):
    return v0 + (v1 - v0) * tau


def inflated_r(model, x, u: MachineDseInputs, base_r, sigma_mag, sigma_ang):
    """Measurement covariance including propagated input-voltage noise.

    The terminal voltage is a measured input, so its noise reappears in
    the P/Q predictions with a gain of a few; ignoring it makes the
    filter over-trust those channels and bleed the inconsistency into
    whatever state can absorb it (fatal for parameter tracks).
    """
    vm, va = abs(u.v_bus), float(np.angle(u.v_bus))

    def h_at(vm_, va_):
        uu = MachineDseInputs(v_bus=vm_ * np.exp(1j * va_), mech=u.mech)
        return model.measure(x, uu)

    eps = 1e-5
    j_mag = (h_at(vm + eps, va) - h_at(vm - eps, va)) / (2 * eps)
    j_ang = (h_at(vm, va + eps) - h_at(vm, va - eps)) / (2 * eps)
    jac = np.column_stack([j_mag, j_ang])
    return base_r + jac @ np.diag([sigma_mag**2, sigma_ang**2]) @ jac.T


def run_machine_filter(model: MachineDseModel, stream, machine: str,
                       mech_inputs, config, step=None,
                       input_sigma: tuple | None = None):
    """Run a filter over a PMU stream for one machine.

    ``mech_inputs`` is a (T, 2) array of (P_m, E_fd) at frame times;
    the V channels drive the process model, (P, Q, freq) are assimilated.
    ``input_sigma`` = (sigma_V_mag, sigma_V_ang) turns on input-noise
    inflation of R. Returns dict with means, covs, chi2 per frame.
    """
    from dataclasses import replace

    from .kalman import ukf_step
    step = step or ukf_step
    from ..models import machine as mach_mod
    from ..models.measurement import QUALITY_GOOD

    T = len(stream)
    means = np.empty((T, model.n_states))
    covs = np.empty((T, model.n_states, model.n_states))
    chi2 = np.empty(T)
    prior = (config.x0, config.P0)
    v_prev = None
    for k in range(T):
        v = (stream.channels[f"{machine}.V_mag"][k]
             * np.exp(1j * stream.channels[f"{machine}.V_ang"][k]))
        u = MachineDseInputs(
            v_bus=v, mech=mach_mod.MachineInput(P_m=max(mech_inputs[k][0], 0.0),
                                                E_fd=mech_inputs[k][1]),
            v_bus_prev=v_prev)
        v_prev = v
        z = np.array([stream.channels[nm][k] for nm in model.channel_names])
        for i, nm in enumerate(model.channel_names):
            if stream.quality[nm][k] != QUALITY_GOOD:
                z[i] = np.nan
        cfg_k = config
        if input_sigma is not None:
            r_eff = inflated_r(model, prior[0], u, config.R, *input_sigma)
            cfg_k = replace(config, R=r_eff)
        res = step(model, cfg_k, prior, z, u,
                   timestamp=float(stream.times[k]))
        prior = (res.mean, res.cov)
        means[k] = res.mean
        covs[k] = res.cov
        chi2[k] = res.chi2
    return {"means": means, "covs": covs, "chi2": chi2,
            "times": stream.times.copy()}


class JointParamModel(MachineDseModel):
    """Machine model with selected constants appended as random-walk states.

    Supports the constants that drive relay settings: the inertia H and
    the d-axis transient reactance Xd'. Parameter entries evolve only
    through process noise; the physical prediction reads them from the
    state on every call.
    """

    SUPPORTED = ("H", "Xd_p")

    def __init__(self, params, variant, frame_dt, estimate=("H",), **kw):
        super().__init__(params, variant, frame_dt, **kw)
        for p in estimate:
            if p not in self.SUPPORTED:
                raise ValueError(f"cannot estimate {p!r}; supported: "
                                 f"{self.SUPPORTED}")
        self.estimated = tuple(estimate)
        self.n_states += len(self.estimated)
        self.state_labels = self.state_labels + ("parameter",) * len(self.estimated)

    def _params_for(self, x):
        over = {}
        for k, name in enumerate(self.estimated):
            over[name] = float(x[self.n_phys + k])
        base = self.params
        # sigma points can briefly wander outside physical bounds
        h = max(over.get("H", base.H), 0.05)
        xd_p = min(max(over.get("Xd_p", base.Xd_p), 1e-3), base.Xd)
        return mach.MachineParams(
            H=h, D=base.D, Xd=base.Xd, Xq=base.Xq,
            Xd_p=xd_p, Xq_p=base.Xq_p,
            Tdo_p=base.Tdo_p, Tqo_p=base.Tqo_p, omega_s=base.omega_s)

    def _full_derivs(self, x, u):
        dx = np.zeros(self.n_states)
        st = mach.MachineState.from_array(x[:self.n_phys], self.variant,
                                          emf=self.emf)
        dx[:self.n_phys] = mach.machine_derivatives(
            st, u.v_bus, u.mech, self._params_for(x), self.variant)
        return dx
