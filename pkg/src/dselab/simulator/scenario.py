"""Scenario description: roster, events, measurement specs, validation.

A scenario is either electromechanical (machines over a phasor network,
PMU streams) or an EMT two-terminal line study (sampled-value streams).
Validation aggregates every violation instead of stopping at the first.
"""

from dataclasses import dataclass, field

import numpy as np

from ..models.measurement import SUPPORTED_SV_RATES, sv_sample_period
from .electromech import MachineSpec
from .emt import LinePlantSpec

ELECTROMECH = "electromech"
EMT_LINE = "emt-line"

EVENT_KINDS = ("apply-fault", "clear-fault", "trip-branch", "step-input",
               "channel-corruption")
CORRUPTION_MODES = ("scale", "bias", "missing", "outliers")


@dataclass
class NoiseSpec:
    """Measurement corruption description for a stream.

    ``sigma`` is the per-channel Gaussian standard deviation (a dict maps
    channel names to overrides, with "*" as the default). Outliers are
    additive Gaussians of ``outlier_factor`` times the channel sigma,
    occurring independently with probability ``outlier_prob``.
    """

    sigma: float | dict = 0.0
    outlier_prob: float = 0.0
    outlier_factor: float = 20.0

    def sigma_for(self, channel: str) -> float:
        if isinstance(self.sigma, dict):
            return float(self.sigma.get(channel, self.sigma.get("*", 0.0)))
        return float(self.sigma)

    def violations(self, where: str) -> list:
        out = []
        sigmas = (self.sigma.values() if isinstance(self.sigma, dict)
                  else [self.sigma])
        if any(s < 0 for s in sigmas):
            out.append(f"{where}: noise sigma must be >= 0")
        if not 0.0 <= self.outlier_prob < 1.0:
            out.append(f"{where}: outlier probability must be in [0, 1)")
        return out


@dataclass
class StreamSpec:
    name: str
    kind: str                       # "PMU" | "SV"
    rate: float                     # PMU: frames/s; SV: samples per cycle
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    channels: list | None = None    # None = every channel the source offers


@dataclass
class Event:
    time: float
    kind: str
    target: str | int | None = None
    value: float | None = None
    mode: str | None = None         # channel-corruption mode


@dataclass
class BranchSpec:
    i: int
    j: int
    r: float
    x: float
    b: float = 0.0
    tag: str = ""
    kind: str = "line"              # "line" | "transformer"


@dataclass
class LoadSpec:
    bus: int
    p: float
    q: float = 0.0


@dataclass
class NetworkSpec:
    n_bus: int
    branches: list = field(default_factory=list)
    loads: list = field(default_factory=list)
    fixed_buses: dict = field(default_factory=dict)      # bus -> complex V
    bus_positions: dict = field(default_factory=dict)    # bus -> electrical coord


@dataclass
class Scenario:
    id: str
    kind: str
    horizon: float
    h: float
    seed: int = 0
    nominal_freq: float = 60.0
    machines: list = field(default_factory=list)
    network: NetworkSpec | None = None
    plant: LinePlantSpec | None = None
    events: list = field(default_factory=list)
    streams: list = field(default_factory=list)
    relays: list = field(default_factory=list)
    controllers: list = field(default_factory=list)
    estimators: list = field(default_factory=list)

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.h))

    def grid(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.h

    def validate(self) -> list:
        """Every violation found, as human-readable strings."""
        v = []
        if self.kind not in (ELECTROMECH, EMT_LINE):
            v.append(f"unknown scenario kind {self.kind!r}")
        if self.h <= 0:
            v.append(f"step size h must be positive, got {self.h}")
        if self.horizon <= 0:
            v.append(f"horizon must be positive, got {self.horizon}")

        last_t = -np.inf
        open_faults = set()
        for n, ev in enumerate(self.events):
            where = f"event[{n}] ({ev.kind} at t={ev.time})"
            if ev.kind not in EVENT_KINDS:
                v.append(f"{where}: unknown kind")
                continue
            if ev.time < 0:
                v.append(f"{where}: negative event time")
            if self.horizon > 0 and ev.time > self.horizon:
                v.append(f"{where}: beyond the horizon {self.horizon}")
            if ev.time < last_t:
                v.append(f"{where}: events must be time-ordered")
            last_t = ev.time
            if ev.kind == "apply-fault":
                if ev.value is None or ev.value <= 0:
                    v.append(f"{where}: fault conductance must be positive")
                open_faults.add(ev.target)
            elif ev.kind == "clear-fault":
                if ev.target not in open_faults:
                    v.append(f"{where}: no matching apply-fault for "
                             f"target {ev.target!r}")
                open_faults.discard(ev.target)
            elif ev.kind == "step-input":
                if ev.value is None:
                    v.append(f"{where}: step-input needs a value")
            elif ev.kind == "channel-corruption":
                if ev.mode not in CORRUPTION_MODES:
                    v.append(f"{where}: corruption mode must be one of "
                             f"{CORRUPTION_MODES}")

        names = set()
        for s in self.streams:
            where = f"stream {s.name!r}"
            if s.name in names:
                v.append(f"{where}: duplicate stream name")
            names.add(s.name)
            v += s.noise.violations(where)
            if s.kind == "SV":
                if int(s.rate) not in SUPPORTED_SV_RATES:
                    v.append(f"{where}: SV rate must be one of "
                             f"{SUPPORTED_SV_RATES}, got {s.rate}")
                else:
                    ts = sv_sample_period(int(s.rate), self.nominal_freq)
                    if self.h > ts / 4.0 + 1e-15:
                        v.append(f"{where}: SV streams need h <= 1/4 sample "
                                 f"period ({ts / 4.0:.3e} s), got {self.h}")
            elif s.kind == "PMU":
                if s.rate <= 0:
                    v.append(f"{where}: PMU frame rate must be positive")
                elif self.h > 0:
                    stride = 1.0 / (s.rate * self.h)
                    if abs(stride - round(stride)) > 1e-9:
                        v.append(f"{where}: PMU rate {s.rate}/s must divide "
                                 f"the grid (1/h = {1 / self.h:.6g}/s)")
            else:
                v.append(f"{where}: unknown stream kind {s.kind!r}")

        if self.kind == ELECTROMECH:
            if self.network is None:
                v.append("electromechanical scenario needs a network")
            if not self.machines:
                v.append("electromechanical scenario needs at least one machine")
            if self.network is not None:
                for msp in self.machines:
                    if not 0 <= msp.bus < self.network.n_bus:
                        v.append(f"machine {msp.name!r}: bus {msp.bus} out of "
                                 f"range for {self.network.n_bus} buses")
        if self.kind == EMT_LINE and self.plant is None:
            v.append("EMT line scenario needs a line plant")
        return v


class ScenarioValidationError(ValueError):
    def __init__(self, violations):
        super().__init__("invalid scenario:\n  " + "\n  ".join(violations))
        self.violations = list(violations)


@dataclass
class Trajectory:
    """Ground-truth result on the uniform integration grid."""

    times: np.ndarray
    states: np.ndarray               # (T+1, n)
    labels: tuple
    algebraic: np.ndarray            # (T+1, n_bus) complex, or empty
    event_markers: list = field(default_factory=list)
