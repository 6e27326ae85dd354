"""Machine model checks: equilibrium, fault acceleration, field dynamics."""

import numpy as np
import pytest

from dselab.models import MachineInput, MachineParams, MachineState
from dselab.models.errors import ModelShapeError, NumericError
from dselab.models.machine import (
    CLASSICAL,
    TWO_AXIS,
    dq_currents,
    electrical_power,
    machine_derivatives,
)

PARAMS = MachineParams(H=5.0, D=0.0, Xd=1.8, Xq=1.7, Xd_p=0.3, Xq_p=0.55,
                       Tdo_p=8.0, Tqo_p=0.4)


def test_classical_equilibrium_derivatives_zero():
    # delta chosen freely; P_m set to the resulting electrical power.
    st = MachineState(delta=0.4, domega=0.0, Eq_p=1.05)
    v = 0.98 * np.exp(1j * 0.1)
    p_e = electrical_power(st, v, PARAMS, CLASSICAL)
    dx = machine_derivatives(st, v, MachineInput(P_m=p_e), PARAMS, CLASSICAL)
    assert dx == pytest.approx([0.0, 0.0], abs=0.0)


def test_two_axis_equilibrium_derivatives_zero():
    # dEd'/dt = 0 has the closed form Ed' = (Xq - Xq') V_d / Xq given
    # I_q = (V_d - Ed')/Xq'; build the equilibrium from it exactly.
    v = 1.0 + 0.0j
    delta = 0.5
    v_d = (v * np.exp(-1j * (delta - np.pi / 2))).real
    ed_p = (PARAMS.Xq - PARAMS.Xq_p) * v_d / PARAMS.Xq
    st = MachineState(delta=delta, domega=0.0, Eq_p=1.02, Ed_p=ed_p)
    i_d, i_q = dq_currents(st, v, PARAMS, TWO_AXIS)
    e_fd = st.Eq_p + (PARAMS.Xd - PARAMS.Xd_p) * i_d
    p_e = electrical_power(st, v, PARAMS, TWO_AXIS)
    dx = machine_derivatives(st, v, MachineInput(P_m=p_e, E_fd=e_fd),
                             PARAMS, TWO_AXIS)
    assert np.allclose(dx, 0.0, atol=1e-12)


def test_classical_bolted_fault_acceleration():
    # Terminal voltage collapses to zero: P_e = 0 through a lossless
    # reactance, so the rotor accelerates at P_m over the inertia 2H.
    st = MachineState(delta=0.3, domega=0.0, Eq_p=1.0)
    inp = MachineInput(P_m=0.9)
    dx = machine_derivatives(st, 0.0j, inp, PARAMS, CLASSICAL)
    assert dx[1] == pytest.approx(0.9 / (2.0 * PARAMS.H), rel=1e-14)


def test_two_axis_field_step_hand_evaluated():
    # dEq'/dt = (E_fd - Eq' - (Xd - Xd') I_d) / Tdo', evaluated by hand at
    # a fixed operating point before and after stepping E_fd 1.0 -> 1.2.
    st = MachineState(delta=0.6, domega=0.0, Eq_p=1.0, Ed_p=0.1)
    v = 1.0 + 0.0j
    i_d, _ = dq_currents(st, v, PARAMS, TWO_AXIS)
    for e_fd in (1.0, 1.2):
        expected = (e_fd - 1.0 - (1.8 - 0.3) * i_d) / 8.0
        dx = machine_derivatives(st, v, MachineInput(P_m=0.5, E_fd=e_fd),
                                 PARAMS, TWO_AXIS)
        assert dx[2] == pytest.approx(expected, rel=1e-14)
    # The step shows up only through E_fd (difference 0.2 / Tdo').
    d1 = machine_derivatives(st, v, MachineInput(P_m=0.5, E_fd=1.0), PARAMS, TWO_AXIS)
    d2 = machine_derivatives(st, v, MachineInput(P_m=0.5, E_fd=1.2), PARAMS, TWO_AXIS)
    assert d2[2] - d1[2] == pytest.approx(0.2 / 8.0, rel=1e-14)


def test_shape_and_numeric_errors():
    st = MachineState(delta=0.1, domega=0.0)   # no EMFs
    with pytest.raises(ModelShapeError):
        machine_derivatives(st, 1.0 + 0j, MachineInput(P_m=0.5), PARAMS, TWO_AXIS)
    with pytest.raises(ModelShapeError):
        machine_derivatives(st, 1.0 + 0j, MachineInput(P_m=0.5), PARAMS, "sixth-order")
    bad = MachineState(delta=np.nan, domega=0.0)
    with pytest.raises(NumericError):
        machine_derivatives(bad, 1.0 + 0j, MachineInput(P_m=0.5), PARAMS, CLASSICAL)


def test_param_invariants():
    with pytest.raises(ValueError):
        MachineParams(H=-1.0)
    with pytest.raises(ValueError):
        MachineParams(H=5.0, Xd=0.3, Xd_p=0.5)
    with pytest.raises(ValueError):
        MachineInput(P_m=-0.1)
    p = MachineParams(H=5.0)
    assert p.M == pytest.approx(2.0 * 5.0 / p.omega_s)


def test_purity_bit_identical():
    st = MachineState(delta=0.7, domega=0.003, Eq_p=1.1, Ed_p=0.05)
    v = 0.97 * np.exp(1j * 0.2)
    inp = MachineInput(P_m=0.8, E_fd=1.3)
    a = machine_derivatives(st, v, inp, PARAMS, TWO_AXIS)
    b = machine_derivatives(st, v, inp, PARAMS, TWO_AXIS)
    assert (a == b).all()
