"""Shared scenario builders for the test suite."""

import numpy as np
import pytest

from dselab.models import LineModel, MachineParams
from dselab.simulator import (
    BranchSpec,
    LinePlantSpec,
    MachineSpec,
    NetworkSpec,
    NoiseSpec,
    Scenario,
    SourceSpec,
    StreamSpec,
)

OMEGA = 2 * np.pi * 60.0

# 38-mile line on a 100 MVA / 115 kV style base
LINE_38MI = LineModel(r_per=0.0015, l_per=0.006 / OMEGA,
                      c_per=6.7e-4 / OMEGA, length=38.0, n_sections=4)


def make_line_scenario(horizon=0.25, seed=0, sigma=0.0, fault_d=0.5,
                       events=(), stream_channels=None, angle=0.25,
                       rate=80):
    plant = LinePlantSpec(
        line=LINE_38MI,
        src_local=SourceSpec(e_mag=1.02, phase=angle, r=0.01, l=0.1 / OMEGA),
        src_remote=SourceSpec(e_mag=1.0, phase=0.0, r=0.01, l=0.1 / OMEGA),
        fault_d=fault_d,
    )
    return Scenario(
        id="line-test", kind="emt-line", horizon=horizon,
        h=1.0 / (4 * rate * 60.0), seed=seed, plant=plant,
        events=list(events),
        streams=[StreamSpec("sv", "SV", rate=rate,
                            noise=NoiseSpec(sigma=sigma),
                            channels=stream_channels)],
    )


def make_smib_scenario(horizon=2.0, h=1e-3, seed=0, sigma=0.0, events=(),
                       delta0=0.5, emf=1.1, H=4.0, D=0.0, pmu_rate=50,
                       streams=None):
    net = NetworkSpec(
        n_bus=2,
        branches=[BranchSpec(0, 1, r=0.0, x=0.2, tag="tie")],
        fixed_buses={1: 1.0 + 0j},
    )
    machines = [MachineSpec("g1", 0, MachineParams(H=H, D=D, Xd_p=0.3),
                            "classical", delta0=delta0, emf=emf)]
    if streams is None:
        streams = [StreamSpec("pmu", "PMU", rate=pmu_rate,
                              noise=NoiseSpec(sigma=sigma))]
    return Scenario(id="smib-test", kind="electromech", horizon=horizon,
                    h=h, seed=seed, machines=machines, network=net,
                    events=list(events), streams=streams)


@pytest.fixture
def line_scenario():
    return make_line_scenario


@pytest.fixture
def smib_scenario():
    return make_smib_scenario
