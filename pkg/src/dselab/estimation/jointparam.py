"""Joint state and parameter estimation over PMU frame streams."""

from dataclasses import dataclass

import numpy as np

from ..models import machine as mach
from ..models.measurement import QUALITY_GOOD
from .kalman import FilterConfig, ukf_step
from .machine_dse import JointParamModel, MachineDseInputs


@dataclass
class JointEstimateSeries:
    times: np.ndarray
    states: np.ndarray            # physical state tracks
    params: dict                  # name -> track array
    chi2: np.ndarray
    low_excitation: bool          # no disturbance seen in the window


def joint_state_parameter_estimate(params: mach.MachineParams, variant: str,
                                   stream, machine: str, mech_inputs,
                                   estimate=("H",), initial_guess=None,
                                   emf=None, q_param=1e-8, sigma=0.01,
                                   nominal_freq=60.0,
                                   x0_phys=None) -> JointEstimateSeries:
    """Track machine states plus selected constants from one PMU stream.

    ``mech_inputs`` is a (T, 2) array of (P_m, E_fd) aligned with the
    stream; ``initial_guess`` maps parameter names to starting values.
    A window with no excitation cannot identify parameters, so the result
    carries a low-excitation flag based on the measured power swing.
    """
    dt = float(stream.times[1] - stream.times[0])
    model = JointParamModel(params, variant, dt, estimate=estimate,
                            nominal_freq=nominal_freq, emf=emf,
                            channel_prefix=f"{machine}.", use_rocof=True)
    guess = dict(initial_guess or {})
    base = {"H": params.H, "Xd_p": params.Xd_p}

    p_series = stream.channels[f"{machine}.P"]
    low_excitation = float(np.ptp(p_series)) < 10.0 * sigma

    x0 = np.zeros(model.n_states)
    if x0_phys is not None:
        x0[:model.n_phys] = x0_phys
    else:
        x0[0] = np.arctan2(p_series[0], 1.0)
    for k, name in enumerate(model.estimated):
        x0[model.n_phys + k] = guess.get(name, base[name])

    q = np.full(model.n_states, 1e-6)
    q[model.n_phys:] = q_param
    r = np.eye(len(model.channel_names)) * sigma**2
    # q_param = 0 means the parameters are frozen model constants: no
    # prior uncertainty either, so the tracks stay exactly put
    p_par = [0.0 if q_param == 0.0
             else max(0.25 * x0[model.n_phys + k], 1e-3) ** 2
             for k in range(len(model.estimated))]
    p0 = np.diag([0.1] * model.n_phys + p_par)
    cfg = FilterConfig(Q=np.diag(q), R=r, x0=x0, P0=p0)

    from .machine_dse import run_machine_filter

    out = run_machine_filter(model, stream, machine, mech_inputs, cfg,
                             input_sigma=(sigma, sigma))
    tracks = {}
    for i, name in enumerate(model.estimated):
        tracks[name] = out["means"][:, model.n_phys + i]
    return JointEstimateSeries(times=stream.times.copy(),
                               states=out["means"][:, :model.n_phys],
                               params=tracks, chi2=out["chi2"],
                               low_excitation=low_excitation)
