"""Measurement synthesis: PMU phasor frames and sampled-value streams.

All channels are real-valued series (phasors split into magnitude and
angle channels) so that streams round-trip losslessly through CSV.
Quality flags per channel: 0 good, 1 missing, 2 suspect.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

QUALITY_GOOD = 0
QUALITY_MISSING = 1
QUALITY_SUSPECT = 2

SUPPORTED_SV_RATES = (80, 256)


@dataclass
class MeasurementFrame:
    """One timestamped measurement set."""

    timestamp: float
    kind: str                      # "PMU" | "SV"
    channels: dict                 # name -> float
    quality: dict = field(default_factory=dict)   # name -> int flag

    def flag(self, name):
        return self.quality.get(name, QUALITY_GOOD)


class MeasurementStream:
    """Columnar measurement series with per-channel quality flags."""

    def __init__(self, name: str, kind: str, times, channels: dict,
                 quality: dict | None = None):
        self.name = name
        self.kind = kind
        self.times = np.asarray(times, dtype=float)
        if self.times.ndim != 1:
            raise ValueError("times must be a 1-D array")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError(f"stream {name!r}: timestamps must strictly increase")
        self.channels = {k: np.asarray(v, dtype=float) for k, v in channels.items()}
        n = len(self.times)
        for k, v in self.channels.items():
            if v.shape != (n,):
                raise ValueError(f"channel {k!r} length {v.shape} != {n}")
        self.quality = {}
        quality = quality or {}
        for k in self.channels:
            q = quality.get(k)
            self.quality[k] = (np.asarray(q, dtype=int) if q is not None
                               else np.zeros(n, dtype=int))

    def __len__(self):
        return len(self.times)

    @property
    def channel_names(self):
        return list(self.channels.keys())

    def frame(self, k: int) -> MeasurementFrame:
        return MeasurementFrame(
            timestamp=float(self.times[k]),
            kind=self.kind,
            channels={name: float(col[k]) for name, col in self.channels.items()},
            quality={name: int(q[k]) for name, q in self.quality.items()},
        )

    def copy(self) -> "MeasurementStream":
        return MeasurementStream(
            self.name, self.kind, self.times.copy(),
            {k: v.copy() for k, v in self.channels.items()},
            {k: v.copy() for k, v in self.quality.items()},
        )


def measure_pmu(states: dict, sol, network, domega_dot: dict,
                nominal_freq: float = 60.0, timestamp: float = 0.0) -> MeasurementFrame:
    """PMU frame at every machine bus of a solved network instant.

    Channels per machine m: m.V_mag, m.V_ang, m.I_mag, m.I_ang, m.P, m.Q,
    m.freq (Hz) and m.rocof (Hz/s). Frequency at a machine bus follows the
    rotor: f = f_nominal * (1 + domega).
    """
    channels = {}
    for m_at in network.machines:
        st = states[m_at.name]
        v = sol.voltages[m_at.bus]
        i = sol.currents[m_at.name]
        s = v * np.conj(i)
        pre = m_at.name
        channels[f"{pre}.V_mag"] = abs(v)
        channels[f"{pre}.V_ang"] = float(np.angle(v))
        channels[f"{pre}.I_mag"] = abs(i)
        channels[f"{pre}.I_ang"] = float(np.angle(i))
        channels[f"{pre}.P"] = s.real
        channels[f"{pre}.Q"] = s.imag
        channels[f"{pre}.freq"] = nominal_freq * (1.0 + st.domega)
        channels[f"{pre}.rocof"] = nominal_freq * domega_dot.get(m_at.name, 0.0)
    return MeasurementFrame(timestamp=timestamp, kind="PMU", channels=channels)


def sv_sample_period(rate: int, nominal_freq: float = 60.0) -> float:
    """Sample period of an SV stream (rate is samples per nominal cycle)."""
    if rate not in SUPPORTED_SV_RATES:
        raise ConfigurationError(
            f"SV rate {rate} not supported; choose one of {SUPPORTED_SV_RATES}")
    return 1.0 / (rate * nominal_freq)


def measure_sv(times, values: dict, rate: int, nominal_freq: float = 60.0,
               name: str = "sv") -> MeasurementStream:
    """Resample simulated waveforms onto the synchronized SV grid.

    ``times`` is the (uniform) simulation grid and ``values`` maps channel
    names to waveform arrays on that grid. Samples land on exact multiples
    of the sample period; the simulation step must divide it.
    """
    ts = sv_sample_period(rate, nominal_freq)
    times = np.asarray(times, dtype=float)
    h = times[1] - times[0]
    stride = ts / h
    stride_i = int(round(stride))
    if abs(stride - stride_i) > 1e-9 or stride_i < 1:
        raise ConfigurationError(
            f"simulation step {h} does not divide the SV sample period {ts}")
    idx = np.arange(0, len(times), stride_i)
    sample_times = idx * h
    return MeasurementStream(
        name, "SV", sample_times,
        {k: np.asarray(v, dtype=float)[idx] for k, v in values.items()},
    )
