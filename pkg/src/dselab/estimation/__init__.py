"""Dynamic state estimation: filters, observers, frequency extraction."""

from .bench import (
    BenchSystem,
    LinearDiscreteModel,
    bench_system,
    nees_series,
    rmse,
    run_filter,
    run_observer_series,
    simulate_bench,
)
from .frequency import InsufficientDataError, estimate_frequency_rocof
from .jointparam import JointEstimateSeries, joint_state_parameter_estimate
from .kalman import (
    EstimateResult,
    FilterConfig,
    SigmaPointSet,
    chi_square_threshold,
    clamp_psd,
    ekf_step,
    innovation_chi_square,
    ukf_step,
    unscented_transform,
    ut_moments,
)
from .linefilter import LineFilterModel, run_line_filter
from .machine_dse import JointParamModel, MachineDseInputs, MachineDseModel
from .observer import (
    ObservabilityError,
    ObserverDesign,
    design_observer,
    observer_step,
)
from .remote import RemoteEstimate, remote_terminal_estimate

__all__ = [
    "BenchSystem",
    "EstimateResult",
    "FilterConfig",
    "InsufficientDataError",
    "JointEstimateSeries",
    "JointParamModel",
    "LineFilterModel",
    "LinearDiscreteModel",
    "MachineDseInputs",
    "MachineDseModel",
    "ObservabilityError",
    "ObserverDesign",
    "RemoteEstimate",
    "SigmaPointSet",
    "bench_system",
    "chi_square_threshold",
    "clamp_psd",
    "design_observer",
    "ekf_step",
    "estimate_frequency_rocof",
    "innovation_chi_square",
    "joint_state_parameter_estimate",
    "nees_series",
    "observer_step",
    "remote_terminal_estimate",
    "rmse",
    "run_filter",
    "run_line_filter",
    "run_observer_series",
    "simulate_bench",
    "ukf_step",
    "unscented_transform",
    "ut_moments",
]
