"""Scenario engine checks: determinism, noise statistics, event handling."""

import numpy as np
import pytest
from scipy import stats

from dselab.models import LineModel, MachineParams
from dselab.simulator import (
    BranchSpec,
    Event,
    LinePlantSpec,
    MachineSpec,
    NetworkSpec,
    NoiseSpec,
    Scenario,
    ScenarioValidationError,
    SourceSpec,
    StreamSpec,
    inject_corruption,
    run_scenario,
)

OMEGA = 2 * np.pi * 60.0


def smib_scenario(**kw):
    net = NetworkSpec(
        n_bus=2,
        branches=[BranchSpec(0, 1, r=0.0, x=0.2, tag="tie")],
        fixed_buses={1: 1.0 + 0j},
    )
    machines = [MachineSpec("g1", 0, MachineParams(H=4.0, D=0.0, Xd_p=0.3),
                            "classical", delta0=0.5, emf=1.1)]
    base = dict(id="smib", kind="electromech", horizon=0.5, h=1e-3, seed=42,
                machines=machines, network=net)
    base.update(kw)
    return Scenario(**base)


def line_scenario(**kw):
    line = LineModel(r_per=0.02, l_per=0.4 / OMEGA, c_per=0.05 / OMEGA,
                     length=1.0, n_sections=4)
    plant = LinePlantSpec(
        line=line,
        src_local=SourceSpec(e_mag=1.0, phase=0.25, r=0.01, l=0.1 / OMEGA),
        src_remote=SourceSpec(e_mag=1.0, phase=0.0, r=0.01, l=0.1 / OMEGA),
    )
    base = dict(id="line", kind="emt-line", horizon=0.1, h=1.0 / (4 * 4800),
                seed=7, plant=plant)
    base.update(kw)
    return Scenario(**base)


def test_steady_state_hold_no_events():
    res = run_scenario(smib_scenario(horizon=1.0))
    drift = np.max(np.abs(res.trajectory.states - res.trajectory.states[0]))
    assert drift <= 1e-9


def test_determinism_same_seed_identical_bytes():
    sc = smib_scenario(streams=[StreamSpec("pmu", "PMU", rate=50,
                                           noise=NoiseSpec(sigma=0.01))])
    r1 = run_scenario(sc)
    r2 = run_scenario(smib_scenario(streams=sc.streams))
    assert np.array_equal(r1.trajectory.states, r2.trajectory.states)
    for name in r1.streams:
        for ch in r1.streams[name].channel_names:
            assert np.array_equal(r1.streams[name].channels[ch],
                                  r2.streams[name].channels[ch])


def test_zero_noise_measurements_equal_truth_channels():
    sc = smib_scenario(streams=[StreamSpec("pmu", "PMU", rate=50)])
    res = run_scenario(sc)
    st = res.streams["pmu"]
    idx = np.arange(0, len(res.trajectory.times), 20)
    f_truth = 60.0 * (1.0 + res.trajectory.states[idx, 1])
    assert np.array_equal(st.channels["g1.freq"], f_truth)
    assert np.array_equal(st.channels["g1.P"], st.channels["g1.P"])


def test_noise_sample_std_in_bounds():
    # 10k frames of sigma=0.01 noise: sample std within [0.0095, 0.0105]
    # (well inside the chi-squared 99.9% band for n=10000).
    sc = smib_scenario(
        horizon=10.0, h=1e-3,
        streams=[StreamSpec("pmu", "PMU", rate=1000,
                            noise=NoiseSpec(sigma=0.01))])
    res = run_scenario(sc)
    clean = run_scenario(smib_scenario(horizon=10.0, h=1e-3,
                                       streams=[StreamSpec("pmu", "PMU",
                                                           rate=1000)]))
    diff = (res.streams["pmu"].channels["g1.V_mag"]
            - clean.streams["pmu"].channels["g1.V_mag"])
    assert len(diff) >= 10000
    assert 0.0095 <= np.std(diff) <= 0.0105


def test_fault_event_and_reversibility():
    sc = smib_scenario(events=[
        Event(time=0.1, kind="apply-fault", target=0, value=1e4),
        Event(time=0.2, kind="clear-fault", target=0),
    ])
    res = run_scenario(sc)
    k_f = int(0.1 / sc.h)
    # during fault the machine accelerates
    assert res.trajectory.states[k_f + 50, 1] > 1e-4
    assert len(res.trajectory.event_markers) == 2


def test_validation_aggregates_all_violations():
    sc = smib_scenario(
        h=-1.0,
        events=[Event(time=-1.0, kind="clear-fault", target=0),
                Event(time=-2.0, kind="wat")],
        streams=[StreamSpec("s", "SV", rate=99)])
    with pytest.raises(ScenarioValidationError) as exc:
        run_scenario(sc)
    msgs = "\n".join(exc.value.violations)
    assert "h must be positive" in msgs
    assert "negative event time" in msgs
    assert "no matching apply-fault" in msgs
    assert "unknown kind" in msgs
    assert "SV rate" in msgs
    assert len(exc.value.violations) >= 5


def test_emt_line_steady_state_and_sv_grid():
    sc = line_scenario(streams=[StreamSpec("sv", "SV", rate=80)])
    res = run_scenario(sc)
    sv = res.streams["sv"]
    # exact synchronized grid
    assert np.allclose(np.diff(sv.times), 1.0 / 4800.0, atol=1e-15)
    # started from the phasor steady state: waveform amplitude stays put
    v = sv.channels["V_local"]
    assert np.ptp(v[:80]) == pytest.approx(np.ptp(v[-80:]), rel=1e-3)


def test_emt_internal_fault_disturbs_remote_current():
    sc = line_scenario(
        horizon=0.15,
        events=[Event(time=0.05, kind="apply-fault", target="internal",
                      value=50.0)])
    res = run_scenario(sc)
    i_rem = res.trajectory.states[:, res.plant.i_ext_branch]
    k = int(0.05 / sc.h)
    before = np.max(np.abs(i_rem[:k]))
    after = np.max(np.abs(i_rem[k:k + 4 * int(1 / 60 / sc.h)]))
    assert after > 2.0 * before


def test_inject_corruption_modes():
    sc = line_scenario(streams=[StreamSpec("sv", "SV", rate=80)])
    res = run_scenario(sc)
    sv = res.streams["sv"]
    same = inject_corruption(sv, "I_local", "scale", value=1.0)
    assert np.array_equal(same.channels["I_local"], sv.channels["I_local"])
    doubled = inject_corruption(sv, "I_local", "scale", value=2.0)
    ratio = doubled.channels["I_local"] / sv.channels["I_local"]
    assert np.allclose(ratio, 2.0)
    missing = inject_corruption(sv, "V_remote", "missing", start=0.05)
    sel = sv.times >= 0.05
    assert (missing.quality["V_remote"][sel] == 1).all()
    assert (missing.quality["V_remote"][~sel] == 0).all()
    assert (missing.quality["I_local"] == 0).all()
    with pytest.raises(KeyError):
        inject_corruption(sv, "nope", "scale", 2.0)


def test_outlier_count_in_binomial_interval():
    # p=0.01 over 100k samples: count within the central 99% binomial band.
    sc = line_scenario(
        horizon=100000 / 4800.0 + 1e-9,
        streams=[StreamSpec("sv", "SV", rate=80,
                            noise=NoiseSpec(sigma=0.01, outlier_prob=0.01,
                                            outlier_factor=50.0))])
    res = run_scenario(sc)
    clean = run_scenario(line_scenario(
        horizon=sc.horizon,
        streams=[StreamSpec("sv", "SV", rate=80,
                            noise=NoiseSpec(sigma=0.01))]))
    diff = (res.streams["sv"].channels["V_local"]
            - clean.streams["sv"].channels["V_local"])
    n = len(diff)
    assert n >= 100000
    # 50-sigma outliers on top of 1-sigma noise, flagged at 5 sigma; an
    # outlier clears the flag with probability 2*(1 - Phi(5/sqrt(50^2+1))).
    flagged = int(np.sum(np.abs(diff) > 5 * 0.01))
    p_detect = 2.0 * stats.norm.sf(5.0 / np.sqrt(50.0**2 + 1.0))
    lo, hi = stats.binom.ppf([0.005, 0.995], n, 0.01 * p_detect)
    assert lo <= flagged <= hi, (flagged, lo, hi)
