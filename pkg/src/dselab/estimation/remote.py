"""Remote terminal reconstruction from local SV measurements only.

The line-zone filter assimilates just the local voltage/current pair; the
remote entries of the estimated state are the reconstruction, and their
frequency/RoCoF comes from the shared extraction path. No communication
with the far end is involved anywhere.
"""

from dataclasses import dataclass

import numpy as np

from ..models.measurement import MeasurementStream
from .frequency import estimate_frequency_rocof
from .linefilter import LineFilterModel, run_line_filter


@dataclass
class RemoteEstimate:
    stream: MeasurementStream        # channels V_remote, I_remote (estimated)
    freq: np.ndarray                 # remote frequency, Hz
    rocof: np.ndarray                # remote RoCoF, Hz/s
    result: dict                     # raw filter output


def remote_terminal_estimate(stream: MeasurementStream, line, config=None,
                             nominal_freq: float = 60.0,
                             sigma: float = 0.01) -> RemoteEstimate:
    if "V_local" not in stream.channels or "I_local" not in stream.channels:
        raise ValueError("local stream must carry V_local and I_local channels")
    dt = float(stream.times[1] - stream.times[0])
    model = LineFilterModel(line, dt, nominal_freq=nominal_freq, sigma=sigma)
    if config is None:
        config = model.warm_start(stream, nominal_freq=nominal_freq)
    res = run_line_filter(model, stream, channels=("V_local", "I_local"),
                          config=config)
    v_rem = res["means"][:, model.n_line - 1]
    i_rem = res["means"][:, model.i_remote]
    out = MeasurementStream(
        f"{stream.name}:remote", "SV", stream.times,
        {"V_remote": v_rem, "I_remote": i_rem})
    freq, rocof = estimate_frequency_rocof(v_rem, fs=1.0 / dt,
                                           f_nominal=nominal_freq, kind="sv")
    return RemoteEstimate(stream=out, freq=freq, rocof=rocof, result=res)
