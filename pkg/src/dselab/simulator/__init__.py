"""Scenario-driven simulation: integration, events, stream synthesis."""

from .electromech import ElectromechModel, MachineSpec, initialize_equilibrium
from .emt import LinePlant, LinePlantSpec, SourceSpec
from .engine import SimResult, inject_corruption, run_scenario, stream_rng
from .integrate import AffineStepper, StepFailureError, integrate_step
from .scenario import (
    ELECTROMECH,
    EMT_LINE,
    BranchSpec,
    Event,
    LoadSpec,
    NetworkSpec,
    NoiseSpec,
    Scenario,
    ScenarioValidationError,
    StreamSpec,
    Trajectory,
)

__all__ = [
    "AffineStepper",
    "BranchSpec",
    "ELECTROMECH",
    "EMT_LINE",
    "ElectromechModel",
    "Event",
    "LinePlant",
    "LinePlantSpec",
    "LoadSpec",
    "MachineSpec",
    "NetworkSpec",
    "NoiseSpec",
    "Scenario",
    "ScenarioValidationError",
    "SimResult",
    "SourceSpec",
    "StepFailureError",
    "StreamSpec",
    "Trajectory",
    "initialize_equilibrium",
    "inject_corruption",
    "integrate_step",
    "run_scenario",
    "stream_rng",
]
