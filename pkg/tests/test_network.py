"""Network solve checks against hand complex arithmetic and overlay rules."""

import numpy as np
import pytest

from dselab.models import MachineParams, MachineState, NetworkModel, network_solve
from dselab.models.errors import SingularNetworkError
from dselab.models.network import total_injection_power


def smib(xd_p=0.3, x_line=0.2):
    """Machine (bus 0) behind Xd', line to an infinite bus (bus 1)."""
    net = NetworkModel(n_bus=2)
    net.add_branch(0, 1, r=0.0, x=x_line, tag="tie")
    net.set_fixed_voltage(1, 1.0 + 0.0j)
    net.attach_machine("g1", 0, MachineParams(H=5.0, Xd_p=xd_p), "classical")
    return net


def test_smib_no_angle_difference_no_current():
    net = smib()
    sol = net.solve({"g1": MachineState(delta=0.0, domega=0.0, Eq_p=1.0)})
    assert abs(sol.currents["g1"]) == pytest.approx(0.0, abs=1e-12)
    assert sol.P_e["g1"] == pytest.approx(0.0, abs=1e-12)
    assert sol.residual <= 1e-10


def test_smib_hand_complex_arithmetic():
    # E' = 1.05 at 30 deg behind a total reactance of 0.5 to V = 1 at 0.
    delta = np.deg2rad(30.0)
    net = smib(xd_p=0.3, x_line=0.2)
    sol = net.solve({"g1": MachineState(delta=delta, domega=0.0, Eq_p=1.05)})
    e = 1.05 * np.exp(1j * delta)
    i_oracle = (e - 1.0) / (1j * 0.5)
    p_oracle = (e * np.conj(i_oracle)).real
    assert sol.currents["g1"] == pytest.approx(i_oracle, rel=1e-12)
    assert sol.P_e["g1"] == pytest.approx(p_oracle, rel=1e-12)
    # sanity: closed form E'V sin(delta)/X
    assert p_oracle == pytest.approx(1.05 * np.sin(delta) / 0.5, rel=1e-12)


def test_fault_overlay_reversible_bit_exact():
    net = smib()
    states = {"g1": MachineState(delta=0.5, domega=0.0, Eq_p=1.05)}
    y_before = net.y_effective().copy()
    v_before = net.solve(states).voltages.copy()
    net.apply_fault(0, conductance=1e4)
    assert not np.array_equal(net.y_effective(), y_before)
    net.clear_fault(0)
    assert np.array_equal(net.y_effective(), y_before)
    assert np.array_equal(net.solve(states).voltages, v_before)


def test_trip_and_restore_branch():
    net = NetworkModel(n_bus=3)
    net.add_branch(0, 1, 0.01, 0.1, tag="a")
    net.add_branch(1, 2, 0.01, 0.1, tag="b")
    net.add_branch(0, 2, 0.01, 0.1, tag="c")
    y0 = net.y_base().copy()
    net.trip_branch("b")
    assert net.y_base()[1, 2] == 0.0
    net.restore_branch("b")
    assert np.array_equal(net.y_base(), y0)
    with pytest.raises(ValueError):
        net.trip_branch("nope")


def test_singular_network_names_bus():
    # Isolated machine bus: no path anywhere and no fixed voltage.
    net = NetworkModel(n_bus=2)
    net.set_fixed_voltage(1, 1.0 + 0j)
    # bus 0 completely disconnected, no machine: row of zeros
    with pytest.raises(SingularNetworkError) as exc:
        network_solve({}, net)
    assert exc.value.bus == 0


def test_power_balance_with_losses_and_loads():
    net = NetworkModel(n_bus=3)
    net.add_branch(0, 1, r=0.02, x=0.15, tag="l1")
    net.add_branch(1, 2, r=0.01, x=0.1, tag="l2")
    net.add_load(1, p=0.7, q=0.2)
    net.set_fixed_voltage(2, 1.0 + 0.0j)
    net.attach_machine("g1", 0, MachineParams(H=4.0, Xd_p=0.25), "classical")
    sol = net.solve({"g1": MachineState(delta=0.6, domega=0.0, Eq_p=1.1)})
    assert sol.residual <= 1e-10
    bal = total_injection_power(net, sol)
    assert abs(bal["imbalance"]) <= 1e-8


def test_two_axis_machine_in_network_consistency():
    net = NetworkModel(n_bus=2)
    net.add_branch(0, 1, r=0.0, x=0.2, tag="tie")
    net.set_fixed_voltage(1, 1.0 + 0j)
    p = MachineParams(H=5.0, Xd=1.8, Xq=1.7, Xd_p=0.3, Xq_p=0.55)
    net.attach_machine("g1", 0, p, "two-axis")
    st = MachineState(delta=0.7, domega=0.0, Eq_p=1.1, Ed_p=0.25)
    sol = net.solve({"g1": st})
    # Stator equations hold at the solved voltage: V_d = Ed' + Xq' Iq,
    # V_q = Eq' - Xd' Id in the rotor frame.
    v_dq = sol.voltages[0] * np.exp(-1j * (st.delta - np.pi / 2))
    assert v_dq.real == pytest.approx(st.Ed_p + p.Xq_p * sol.I_q["g1"], abs=1e-10)
    assert v_dq.imag == pytest.approx(st.Eq_p - p.Xd_p * sol.I_d["g1"], abs=1e-10)
    assert sol.residual <= 1e-10
