"""Dynamic component models and measurement functions.

Unit conventions used everywhere in this package:

* all electrical quantities in per unit on one shared system base,
* angles in radians internally (degrees only in reports),
* rotor speed stored as deviation ``domega`` in per unit of synchronous
  speed; the equilibrium of every machine model is therefore at zero,
* time in seconds; per-length line inductance/capacitance carry the
  1/omega_s factor so that v = L di/dt holds with t in seconds,
* angles are wrapped to (-pi, pi] only at reporting boundaries, never
  inside integration.
"""

from .machine import MachineInput, MachineParams, MachineState, machine_derivatives
from .network import NetworkModel, NetworkSolution, network_solve
from .line import LineModel, line_derivatives, line_pi_phasor_response
from .measurement import MeasurementFrame, MeasurementStream, measure_pmu, measure_sv
from .dynamic_model import DynamicModel, StateVector, wrap_angle

__all__ = [
    "MachineInput",
    "MachineParams",
    "MachineState",
    "machine_derivatives",
    "NetworkModel",
    "NetworkSolution",
    "network_solve",
    "LineModel",
    "line_derivatives",
    "line_pi_phasor_response",
    "MeasurementFrame",
    "MeasurementStream",
    "measure_pmu",
    "measure_sv",
    "DynamicModel",
    "StateVector",
    "wrap_angle",
]
