"""Scenario execution: integrate through events, synthesize streams."""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..models import machine as mach
from ..models.measurement import (
    QUALITY_MISSING,
    MeasurementStream,
    sv_sample_period,
)
from ..models.network import NetworkModel
from .electromech import ElectromechModel, initialize_equilibrium
from .emt import LinePlant
from .integrate import AffineStepper, integrate_step
from .scenario import (
    ELECTROMECH,
    EMT_LINE,
    Scenario,
    ScenarioValidationError,
    Trajectory,
)


@dataclass
class SimResult:
    scenario: Scenario
    trajectory: Trajectory
    streams: dict
    model: ElectromechModel | None = None
    plant: LinePlant | None = None
    p_e: dict = field(default_factory=dict)        # machine -> series
    domega_dot: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)     # machine -> (P_m, E_fd) series
    network: NetworkModel | None = None


def stream_rng(seed: int, stream_name: str) -> np.random.Generator:
    """Stable per-stream generator: adding a stream never shifts others."""
    digest = hashlib.sha256(f"{seed}:{stream_name}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def build_network(spec) -> NetworkModel:
    net = NetworkModel(spec.n_bus)
    for br in spec.branches:
        net.add_branch(br.i, br.j, br.r, br.x, br.b, tag=br.tag or None)
    for ld in spec.loads:
        net.add_load(ld.bus, ld.p, ld.q)
    for bus, v in spec.fixed_buses.items():
        net.set_fixed_voltage(int(bus), complex(v))
    return net


def run_scenario(scenario: Scenario) -> SimResult:
    violations = scenario.validate()
    if violations:
        raise ScenarioValidationError(violations)
    if scenario.kind == ELECTROMECH:
        result = _run_electromech(scenario)
    else:
        result = _run_emt_line(scenario)
    _apply_corruption_events(scenario, result.streams)
    return result


# -- electromechanical ----------------------------------------------------

def _run_electromech(scenario: Scenario) -> SimResult:
    net = build_network(scenario.network)
    for msp in scenario.machines:
        net.attach_machine(msp.name, msp.bus, msp.params, msp.variant)
    model = ElectromechModel(net, scenario.machines)
    x, u, sol = initialize_equilibrium(model)

    times = scenario.grid()
    steps = scenario.n_steps
    n = model.n_states
    states = np.empty((steps + 1, n))
    volts = np.empty((steps + 1, net.n_bus), dtype=complex)
    p_e = {sp.name: np.empty(steps + 1) for sp in model.specs}
    dom_dot = {sp.name: np.empty(steps + 1) for sp in model.specs}
    u_hist = {sp.name: np.empty((steps + 1, 2)) for sp in model.specs}
    markers = []

    pending = sorted(scenario.events, key=lambda e: e.time)
    ev_i = 0
    y = sol.voltages
    for k in range(steps + 1):
        t = times[k]
        changed = False
        while ev_i < len(pending) and pending[ev_i].time <= t + 1e-12:
            ev = pending[ev_i]
            if ev.kind != "channel-corruption":
                u = _apply_electromech_event(net, u, ev)
                changed = True
                markers.append((t, ev.kind, ev.target))
            ev_i += 1
        if changed:
            y = model.g_solve(x, u)

        sol = model.solve_full(x)
        states[k] = x
        volts[k] = sol.voltages
        dx = model.f(x, sol.voltages, u)
        for sp in model.specs:
            p_e[sp.name][k] = sol.P_e[sp.name]
            dom_dot[sp.name][k] = dx[model.slices[sp.name].start + 1]
            u_hist[sp.name][k] = (u[sp.name].P_m, u[sp.name].E_fd)

        if k < steps:
            x, y = integrate_step(model, x, sol.voltages, u, scenario.h, t=t)

    traj = Trajectory(times=times, states=states, labels=model.labels,
                      algebraic=volts, event_markers=markers)
    result = SimResult(scenario=scenario, trajectory=traj, streams={},
                       model=model, p_e=p_e, domega_dot=dom_dot,
                       inputs=u_hist, network=net)
    for ssp in scenario.streams:
        result.streams[ssp.name] = _synthesize_pmu_stream(
            scenario, ssp, model, traj, p_e, dom_dot)
    return result


def _apply_electromech_event(net, u, ev):
    if ev.kind == "apply-fault":
        net.apply_fault(int(ev.target), ev.value)
    elif ev.kind == "clear-fault":
        net.clear_fault(int(ev.target))
    elif ev.kind == "trip-branch":
        net.trip_branch(str(ev.target))
    elif ev.kind == "step-input":
        name, field_ = str(ev.target).split(".")
        cur = u[name]
        if field_ == "P_m":
            u = {**u, name: mach.MachineInput(cur.P_m + ev.value, cur.E_fd)}
        elif field_ == "E_fd":
            u = {**u, name: mach.MachineInput(cur.P_m, cur.E_fd + ev.value)}
        else:
            raise ValueError(f"unknown step-input target field {field_!r}")
    return u


def _synthesize_pmu_stream(scenario, ssp, model, traj, p_e, dom_dot):
    stride = int(round(1.0 / (ssp.rate * scenario.h)))
    idx = np.arange(0, len(traj.times), stride)
    f_nom = scenario.nominal_freq
    channels = {}
    for sp in model.specs:
        sl = model.slices[sp.name]
        v = traj.algebraic[idx, sp.bus]
        states = {nm: traj.states[idx, sl.start + off]
                  for off, nm in enumerate(("delta", "domega"))}
        i_ser = np.array([
            mach.terminal_current(
                mach.MachineState.from_array(traj.states[k, sl], sp.variant,
                                             emf=sp.emf),
                traj.algebraic[k, sp.bus], sp.params, sp.variant)
            for k in idx])
        s = traj.algebraic[idx, sp.bus] * np.conj(i_ser)
        pre = sp.name
        channels[f"{pre}.V_mag"] = np.abs(v)
        channels[f"{pre}.V_ang"] = np.angle(v)
        channels[f"{pre}.I_mag"] = np.abs(i_ser)
        channels[f"{pre}.I_ang"] = np.angle(i_ser)
        channels[f"{pre}.P"] = s.real
        channels[f"{pre}.Q"] = s.imag
        channels[f"{pre}.freq"] = f_nom * (1.0 + states["domega"])
        channels[f"{pre}.rocof"] = f_nom * dom_dot[sp.name][idx]
    if ssp.channels:
        channels = {k: channels[k] for k in ssp.channels}
    clean = MeasurementStream(ssp.name, "PMU", traj.times[idx], channels)
    return _add_noise(clean, ssp.noise, stream_rng(scenario.seed, ssp.name))


# -- EMT line ---------------------------------------------------------------

def _run_emt_line(scenario: Scenario) -> SimResult:
    plant = LinePlant(scenario.plant)
    times = scenario.grid()
    steps = scenario.n_steps
    x = plant.steady_state(0.0, h=scenario.h)
    states = np.empty((steps + 1, plant.dim))
    markers = []

    # segment boundaries at event grid indices
    seg_edges = [0]
    net_events = [e for e in scenario.events if e.kind != "channel-corruption"]
    for ev in net_events:
        k = int(np.ceil(ev.time / scenario.h - 1e-12))
        seg_edges.append(min(k, steps))
    seg_edges.append(steps)
    seg_edges = sorted(set(seg_edges))

    states[0] = x
    ev_i = 0
    for a, b in zip(seg_edges[:-1], seg_edges[1:]):
        t_seg = times[a]
        while ev_i < len(net_events) and net_events[ev_i].time <= t_seg + 1e-12:
            ev = net_events[ev_i]
            _apply_emt_event(plant, ev)
            markers.append((t_seg, ev.kind, ev.target))
            ev_i += 1
        stepper = AffineStepper(plant.matrices(), scenario.h)
        u_seq = plant.source_inputs(times[a:b + 1])
        seg = stepper.run(states[a], u_seq)
        states[a:b + 1] = seg

    traj = Trajectory(times=times, states=states,
                      labels=_emt_labels(plant),
                      algebraic=np.zeros((steps + 1, 0), dtype=complex),
                      event_markers=markers)
    result = SimResult(scenario=scenario, trajectory=traj, streams={},
                       plant=plant)
    for ssp in scenario.streams:
        result.streams[ssp.name] = _synthesize_sv_stream(scenario, ssp,
                                                         plant, traj)
    return result


def _apply_emt_event(plant, ev):
    if ev.kind == "apply-fault":
        if ev.target == "external":
            plant.external_fault_conductance = ev.value
        else:
            plant.fault_conductance = ev.value
    elif ev.kind == "clear-fault":
        if ev.target == "external":
            plant.external_fault_conductance = 0.0
        else:
            plant.fault_conductance = 0.0
    elif ev.kind == "step-input":
        # source phase/magnitude steps arrive through rebuilt source specs
        raise NotImplementedError("step-input is not defined for EMT plants")
    else:
        raise ValueError(f"event {ev.kind!r} not supported on EMT plants")


def _emt_labels(plant):
    labels = []
    for k in range(plant.n_line):
        labels.append("capacitor-voltage" if k % 2 == 0 else "inductor-current")
    labels += ["inductor-current", "capacitor-voltage", "inductor-current",
               "inductor-current"]
    return tuple(labels)


def _synthesize_sv_stream(scenario, ssp, plant, traj):
    ts = sv_sample_period(int(ssp.rate), scenario.nominal_freq)
    stride = int(round(ts / scenario.h))
    idx = np.arange(0, len(traj.times), stride)
    chan_idx = plant.channel_indices()
    wanted = ssp.channels or list(chan_idx.keys())
    channels = {nm: traj.states[idx, chan_idx[nm]] for nm in wanted}
    clean = MeasurementStream(ssp.name, "SV", traj.times[idx], channels)
    return _add_noise(clean, ssp.noise, stream_rng(scenario.seed, ssp.name))


# -- noise and corruption ----------------------------------------------------

def _add_noise(stream: MeasurementStream, noise, rng) -> MeasurementStream:
    out = stream.copy()
    for name in out.channel_names:
        sigma = noise.sigma_for(name)
        col = out.channels[name]
        if sigma > 0:
            col += rng.normal(0.0, sigma, size=len(col))
        if noise.outlier_prob > 0 and sigma > 0:
            hits = rng.random(len(col)) < noise.outlier_prob
            bump = rng.normal(0.0, noise.outlier_factor * sigma, size=len(col))
            col += np.where(hits, bump, 0.0)
    return out


def inject_corruption(stream: MeasurementStream, channel: str, mode: str,
                      value: float = 1.0, start: float = 0.0,
                      rng=None) -> MeasurementStream:
    """Hidden-failure style corruption of one channel.

    scale multiplies, bias adds, missing flags samples (values zeroed),
    outliers adds value-sized Gaussians at 1% of samples. Quality flags on
    other channels are untouched.
    """
    if channel not in stream.channels:
        raise KeyError(f"stream {stream.name!r} has no channel {channel!r}")
    out = stream.copy()
    sel = out.times >= start - 1e-12
    col = out.channels[channel]
    if mode == "scale":
        col[sel] *= value
    elif mode == "bias":
        col[sel] += value
    elif mode == "missing":
        out.quality[channel][sel] = QUALITY_MISSING
        col[sel] = 0.0
    elif mode == "outliers":
        rng = rng or np.random.default_rng(0)
        hits = sel & (rng.random(len(col)) < 0.01)
        col[hits] += rng.normal(0.0, value, size=int(hits.sum()))
    else:
        raise ValueError(f"unknown corruption mode {mode!r}")
    return out


def _apply_corruption_events(scenario, streams):
    for ev in scenario.events:
        if ev.kind != "channel-corruption":
            continue
        stream_name, channel = str(ev.target).split("/", 1)
        rng = stream_rng(scenario.seed, f"{stream_name}:corrupt:{channel}")
        streams[stream_name] = inject_corruption(
            streams[stream_name], channel, ev.mode,
            value=ev.value if ev.value is not None else 1.0,
            start=ev.time, rng=rng)
