"""Network algebraic model: admittance matrix, overlays, and the g=0 solve.

Loads are constant admittances folded into the bus matrix, so for given
machine internal EMFs the algebraic constraints are linear and solved
exactly. Fault shunts and branch trips are additive overlays on top of
the base matrix; removing an overlay restores the previous matrix
bit-exactly because the effective matrix is always rebuilt as
base + sum(active overlays) in insertion order.

Buses marked as fixed-voltage (infinite buses) are eliminated from the
solve rather than approximated by a stiff source.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularNetworkError
from . import machine as mach


@dataclass
class _Branch:
    tag: str
    i: int
    j: int
    y_series: complex
    y_shunt: complex = 0.0   # total line charging, half at each end
    in_service: bool = True


@dataclass
class _MachineAttachment:
    name: str
    bus: int
    params: mach.MachineParams
    variant: str


@dataclass
class NetworkSolution:
    """Solved algebraic state plus per-machine electrical quantities."""

    voltages: np.ndarray                 # complex bus voltages, all buses
    P_e: dict                            # machine name -> air-gap power, pu
    I_d: dict
    I_q: dict
    currents: dict                       # machine name -> network-frame phasor
    residual: float                      # max nodal current mismatch, pu


class NetworkModel:
    """Bus admittance model with removable event overlays."""

    def __init__(self, n_bus: int):
        self.n_bus = n_bus
        self._branches: list[_Branch] = []
        self._shunts: list[tuple[int, complex]] = []     # loads and fixed shunts
        self._fault_overlays: list[tuple[int, complex]] = []   # (bus, admittance)
        self.machines: list[_MachineAttachment] = []
        self.fixed_voltage: dict[int, complex] = {}
        self._y_base_cache = None

    # -- construction ----------------------------------------------------

    def add_branch(self, i: int, j: int, r: float, x: float,
                   b_shunt: float = 0.0, tag: str | None = None):
        y = 1.0 / complex(r, x)
        tag = tag or f"branch{len(self._branches)}"
        self._branches.append(_Branch(tag, i, j, y, 1j * b_shunt))
        self._y_base_cache = None
        return tag

    def add_load(self, bus: int, p: float, q: float, v_nominal: float = 1.0):
        """Constant-admittance load drawing (p, q) at the nominal voltage."""
        y = complex(p, -q) / v_nominal**2
        self._shunts.append((bus, y))
        self._y_base_cache = None

    def add_shunt(self, bus: int, y: complex):
        self._shunts.append((bus, y))
        self._y_base_cache = None

    def set_fixed_voltage(self, bus: int, v: complex):
        self.fixed_voltage[bus] = complex(v)

    def attach_machine(self, name: str, bus: int, params: mach.MachineParams,
                       variant: str = mach.CLASSICAL):
        self.machines.append(_MachineAttachment(name, bus, params, variant))

    # -- event overlays ---------------------------------------------------

    def apply_fault(self, bus: int, conductance: float):
        self._fault_overlays.append((bus, complex(conductance)))

    def clear_fault(self, bus: int):
        for k in range(len(self._fault_overlays) - 1, -1, -1):
            if self._fault_overlays[k][0] == bus:
                del self._fault_overlays[k]
                return
        raise ValueError(f"no active fault at bus {bus}")

    def trip_branch(self, tag: str):
        for br in self._branches:
            if br.tag == tag:
                br.in_service = False
                self._y_base_cache = None
                return
        raise ValueError(f"unknown branch tag {tag!r}")

    def restore_branch(self, tag: str):
        for br in self._branches:
            if br.tag == tag:
                br.in_service = True
                self._y_base_cache = None
                return
        raise ValueError(f"unknown branch tag {tag!r}")

    # -- matrices ----------------------------------------------------------

    def y_base(self) -> np.ndarray:
        """In-service admittance matrix without fault overlays."""
        if self._y_base_cache is None:
            y = np.zeros((self.n_bus, self.n_bus), dtype=complex)
            for br in self._branches:
                if not br.in_service:
                    continue
                y[br.i, br.i] += br.y_series + br.y_shunt / 2.0
                y[br.j, br.j] += br.y_series + br.y_shunt / 2.0
                y[br.i, br.j] -= br.y_series
                y[br.j, br.i] -= br.y_series
            for bus, ys in self._shunts:
                y[bus, bus] += ys
            self._y_base_cache = y
        return self._y_base_cache

    def y_effective(self) -> np.ndarray:
        y = self.y_base().copy()
        for bus, ya in self._fault_overlays:
            y[bus, bus] += ya
        return y

    # -- solve --------------------------------------------------------------

    def solve(self, states: dict) -> NetworkSolution:
        """Solve g=0 for the bus voltages given machine internal states.

        ``states`` maps machine name to MachineState. The machine stator
        equations are linear in the rectangular bus voltage, so the whole
        system is one real-valued linear solve (exact, no iteration).
        """
        return network_solve(states, self)


def network_solve(states: dict, network: NetworkModel) -> NetworkSolution:
    n = network.n_bus
    y = network.y_effective()
    fixed = network.fixed_voltage

    free = [b for b in range(n) if b not in fixed]
    idx_of = {b: k for k, b in enumerate(free)}
    m = len(free)

    # Real 2m x 2m system: rows are nodal current balance (re, im) at free
    # buses; unknowns are (re, im) of free bus voltages.
    a = np.zeros((2 * m, 2 * m))
    rhs = np.zeros(2 * m)
    for bi in free:
        r = 2 * idx_of[bi]
        for bj in range(n):
            yij = y[bi, bj]
            if yij == 0:
                continue
            g, b = yij.real, yij.imag
            if bj in fixed:
                v = fixed[bj]
                rhs[r] -= g * v.real - b * v.imag
                rhs[r + 1] -= b * v.real + g * v.imag
            else:
                c = 2 * idx_of[bj]
                a[r, c] += g
                a[r, c + 1] -= b
                a[r + 1, c] += b
                a[r + 1, c + 1] += g

    for m_at in network.machines:
        st = states[m_at.name]
        blk, src = _machine_injection_blocks(st, m_at.params, m_at.variant)
        if m_at.bus in fixed:
            continue     # machine behind an eliminated bus: not supported
        r = 2 * idx_of[m_at.bus]
        # I_inj = blk @ V + src enters the balance Y V - I_inj = 0.
        a[r:r + 2, r:r + 2] -= blk
        rhs[r:r + 2] += src

    try:
        sol = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError:
        bus = _most_singular_bus(a, free)
        raise SingularNetworkError(
            f"network matrix singular under current overlays (around bus {bus})",
            bus=bus)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > 1e14:
        bus = _most_singular_bus(a, free)
        raise SingularNetworkError(
            f"network matrix numerically singular (cond={cond:.2e}, around bus {bus})",
            bus=bus)

    voltages = np.zeros(n, dtype=complex)
    for b, v in fixed.items():
        voltages[b] = v
    for b in free:
        k = idx_of[b]
        voltages[b] = complex(sol[2 * k], sol[2 * k + 1])

    p_e, i_d, i_q, cur = {}, {}, {}, {}
    for m_at in network.machines:
        st = states[m_at.name]
        v = voltages[m_at.bus]
        idq = mach.dq_currents(st, v, m_at.params, m_at.variant)
        i_d[m_at.name], i_q[m_at.name] = idq
        p_e[m_at.name] = mach.electrical_power(st, v, m_at.params, m_at.variant)
        cur[m_at.name] = mach.terminal_current(st, v, m_at.params, m_at.variant)

    residual = _nodal_residual(network, voltages, cur)
    return NetworkSolution(voltages=voltages, P_e=p_e, I_d=i_d, I_q=i_q,
                           currents=cur, residual=residual)


def _machine_injection_blocks(state, params, variant):
    """Linear map I_xy = blk @ V_xy + src for one machine's injection."""
    theta = state.delta - np.pi / 2.0
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    if variant == mach.CLASSICAL:
        xd_p = xq_p = params.Xd_p
        e_d, e_q = 0.0, mach._classical_emf(state)
    else:
        xd_p, xq_p = params.Xd_p, params.Xq_p
        e_d, e_q = state.Ed_p, state.Eq_p
    # In the dq frame: I_d = (e_q - V_q)/xd', I_q = (V_d - e_d)/xq'.
    a_dq = np.array([[0.0, -1.0 / xd_p], [1.0 / xq_p, 0.0]])
    c_dq = np.array([e_q / xd_p, -e_d / xq_p])
    blk = rot @ a_dq @ rot.T
    src = rot @ c_dq
    return blk, src


def _nodal_residual(network: NetworkModel, voltages, machine_currents) -> float:
    inj = np.zeros(network.n_bus, dtype=complex)
    for m_at in network.machines:
        inj[m_at.bus] += machine_currents[m_at.name]
    mismatch = network.y_effective() @ voltages - inj
    free = [b for b in range(network.n_bus) if b not in network.fixed_voltage]
    if not free:
        return 0.0
    return float(np.abs(mismatch[free]).max())


def _most_singular_bus(a, free):
    # Name the bus whose balance row has the smallest norm; heuristic but
    # good enough to point at an isolated or shorted node.
    norms = np.linalg.norm(a, axis=1)
    k = int(np.argmin(norms)) // 2
    return free[k] if k < len(free) else None


def total_injection_power(network: NetworkModel, sol: NetworkSolution) -> dict:
    """Power-balance bookkeeping over a solved instant.

    Returns generation, shunt/load/fault draw, series branch losses and
    the export into fixed-voltage buses; generation minus the other three
    is the reported imbalance (zero up to solver roundoff).
    """
    v = sol.voltages
    gen = sum(sol.P_e.values())
    load = 0.0
    for bus, ys in network._shunts:
        load += (abs(v[bus]) ** 2) * ys.real
    for bus, ya in network._fault_overlays:
        load += (abs(v[bus]) ** 2) * ya.real
    losses = 0.0
    for br in network._branches:
        if not br.in_service:
            continue
        i_ser = br.y_series * (v[br.i] - v[br.j])
        losses += (abs(i_ser) ** 2) * (1.0 / br.y_series).real
    export = 0.0
    for b in network.fixed_voltage:
        i_src = (network.y_effective() @ v)[b]
        for m_at in network.machines:
            if m_at.bus == b:
                i_src -= sol.currents[m_at.name]
        # i_src is the current the fixed source injects; absorbing power
        # from the network counts as positive export.
        export -= (v[b] * np.conj(i_src)).real
    imbalance = gen - load - losses - export
    return {"generation": gen, "load": load, "losses": losses,
            "fixed_bus_export": export, "imbalance": imbalance}
