"""Synchronous machine models (classical and two-axis).

State conventions: rotor angle ``delta`` in rad against the network
reference frame, speed deviation ``domega`` in pu of synchronous speed.
The swing equation on pu speed reads

    d(delta)/dt  = domega * omega_s
    d(domega)/dt = (P_m - P_e - D*domega) / (2H)

and the rotor kinetic energy consistent with it is ``0.5 * M * w**2``
with ``M = 2H/omega_s`` and ``w = domega * omega_s`` the speed deviation
in rad/s (see the protection energy functions).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ModelShapeError, NumericError

CLASSICAL = "classical"
TWO_AXIS = "two-axis"


@dataclass(frozen=True)
class MachineInput:
    """Per-machine exogenous inputs."""

    P_m: float                  # mechanical power, pu
    E_fd: float = 0.0           # field voltage, pu (two-axis only)

    def __post_init__(self):
        if not np.isfinite(self.P_m) or not np.isfinite(self.E_fd):
            raise ValueError("machine inputs must be finite")
        if self.P_m < 0:
            raise ValueError(f"mechanical power must be >= 0, got {self.P_m}")


@dataclass(frozen=True)
class MachineParams:
    """Per-unit machine constants on the shared system base.

    ``M`` is derived, never stored: it is the inertia coefficient of the
    energy function (pu power per (rad/s)/s of rotor acceleration).
    """

    H: float                    # inertia constant, s
    D: float = 0.0              # damping, pu torque per pu speed
    Xd: float = 1.8             # d-axis synchronous reactance, pu
    Xq: float = 1.7
    Xd_p: float = 0.3           # d-axis transient reactance, pu
    Xq_p: float = 0.55
    Tdo_p: float = 8.0          # open-circuit time constants, s
    Tqo_p: float = 0.4
    omega_s: float = 2.0 * np.pi * 60.0   # synchronous speed, rad/s

    def __post_init__(self):
        if self.H <= 0:
            raise ValueError(f"H must be positive, got {self.H}")
        if self.Tdo_p <= 0 or self.Tqo_p <= 0:
            raise ValueError("open-circuit time constants must be positive")
        if not (0 < self.Xd_p <= self.Xd):
            raise ValueError(f"need 0 < Xd' <= Xd, got Xd'={self.Xd_p}, Xd={self.Xd}")

    @property
    def M(self) -> float:
        return 2.0 * self.H / self.omega_s


@dataclass
class MachineState:
    """Dynamic state of one machine.

    The classical model's state vector is exactly (delta, domega); its
    constant EMF magnitude rides along in ``Eq_p`` but has no dynamics.
    The two-axis state vector is (delta, domega, Eq_p, Ed_p).
    """

    delta: float                # rotor angle, rad
    domega: float               # speed deviation, pu
    Eq_p: float | None = None   # q-axis transient EMF, pu
    Ed_p: float | None = None   # d-axis transient EMF, pu

    def as_array(self, variant: str) -> np.ndarray:
        if variant == CLASSICAL:
            return np.array([self.delta, self.domega])
        return np.array([self.delta, self.domega, self.Eq_p, self.Ed_p])

    @classmethod
    def from_array(cls, x, variant: str, emf: float | None = None) -> "MachineState":
        if variant == CLASSICAL:
            return cls(delta=x[0], domega=x[1], Eq_p=emf)
        return cls(delta=x[0], domega=x[1], Eq_p=x[2], Ed_p=x[3])


def dq_currents(state: MachineState, v_bus: complex, params: MachineParams,
                variant: str) -> tuple[float, float]:
    """Stator currents in the rotor dq frame given the terminal voltage.

    Rotor frame convention: phasor = (f_d + j*f_q) * exp(j*(delta - pi/2)),
    stator resistance neglected.
    """
    rot = np.exp(-1j * (state.delta - np.pi / 2.0))
    v_dq = v_bus * rot
    v_d, v_q = v_dq.real, v_dq.imag
    if variant == CLASSICAL:
        e_d, e_q, xd_p, xq_p = 0.0, _classical_emf(state), params.Xd_p, params.Xd_p
    else:
        e_d, e_q, xd_p, xq_p = state.Ed_p, state.Eq_p, params.Xd_p, params.Xq_p
    i_d = (e_q - v_q) / xd_p
    i_q = (v_d - e_d) / xq_p
    return i_d, i_q


def electrical_power(state: MachineState, v_bus: complex, params: MachineParams,
                     variant: str) -> float:
    """Air-gap power from the stator solution (pu)."""
    i_d, i_q = dq_currents(state, v_bus, params, variant)
    if variant == CLASSICAL:
        return _classical_emf(state) * i_q
    return (state.Ed_p * i_d + state.Eq_p * i_q
            + (params.Xq_p - params.Xd_p) * i_d * i_q)


def terminal_current(state: MachineState, v_bus: complex, params: MachineParams,
                     variant: str) -> complex:
    """Machine current injected into the network (network frame)."""
    i_d, i_q = dq_currents(state, v_bus, params, variant)
    return (i_d + 1j * i_q) * np.exp(1j * (state.delta - np.pi / 2.0))


def machine_derivatives(state: MachineState, v_bus: complex, inp,
                        params: MachineParams, variant: str = CLASSICAL) -> np.ndarray:
    """Time derivatives of the machine state.

    ``inp`` carries the mechanical power ``P_m`` and (two-axis) the field
    voltage ``E_fd``. The terminal bus voltage must come from a solved
    network so that the stator algebra is consistent.
    """
    if variant not in (CLASSICAL, TWO_AXIS):
        raise ModelShapeError(f"unknown machine variant {variant!r}")
    if variant == TWO_AXIS and (state.Eq_p is None or state.Ed_p is None):
        raise ModelShapeError("two-axis variant needs Eq_p and Ed_p in the state")
    if not np.isfinite([state.delta, state.domega, inp.P_m]).all() or not np.isfinite(
            [v_bus.real, v_bus.imag]).all():
        raise NumericError("non-finite machine input")

    p_e = electrical_power(state, v_bus, params, variant)
    d_delta = state.domega * params.omega_s
    d_domega = (inp.P_m - p_e - params.D * state.domega) / (2.0 * params.H)
    if variant == CLASSICAL:
        return np.array([d_delta, d_domega])

    i_d, i_q = dq_currents(state, v_bus, params, variant)
    d_eq = (inp.E_fd - state.Eq_p - (params.Xd - params.Xd_p) * i_d) / params.Tdo_p
    d_ed = (-state.Ed_p + (params.Xq - params.Xq_p) * i_q) / params.Tqo_p
    return np.array([d_delta, d_domega, d_eq, d_ed])


def field_voltage_for_equilibrium(state: MachineState, v_bus: complex,
                                  params: MachineParams) -> float:
    """E_fd that makes dEq'/dt vanish at the given operating point (two-axis)."""
    i_d, _ = dq_currents(state, v_bus, params, TWO_AXIS)
    return state.Eq_p + (params.Xd - params.Xd_p) * i_d


def _classical_emf(state: MachineState) -> float:
    # Classical model stores the constant EMF magnitude in Eq_p when set,
    # defaulting to 1.0 pu.
    return state.Eq_p if state.Eq_p is not None else 1.0
