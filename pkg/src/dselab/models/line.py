"""Time-domain transmission line as cascaded pi sections.

The lumped state vector of an n-section line has dimension 2n+1 and
alternates node voltages and section inductor currents:

    [v_0, i_1, v_1, i_2, ..., i_n, v_n]

with v_0 the local terminal and v_n the remote terminal. Each section
contributes half its capacitance to each of its end nodes, so interior
nodes carry a full section capacitance and the terminals half of one.
Terminal injections (current into the line, positive towards the line)
drive the end-node capacitors.

Per-length parameters are in pu with time in seconds: l_per = X_pu/omega_s
and c_per = B_pu/omega_s per unit length.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ModelShapeError


@dataclass(frozen=True)
class LineModel:
    r_per: float          # series resistance, pu / length
    l_per: float          # series inductance, pu*s / length
    c_per: float          # shunt capacitance, pu*s / length
    length: float         # mi or km; must match the per-length base
    n_sections: int = 4
    local_label: str = "local"
    remote_label: str = "remote"

    def __post_init__(self):
        if self.r_per < 0 or self.l_per < 0:
            raise ValueError("R and L per length must be non-negative")
        if self.c_per <= 0:
            raise ValueError("C per length must be positive")
        if self.n_sections < 1:
            raise ValueError("need at least one pi section")

    @property
    def state_dim(self) -> int:
        return 2 * self.n_sections + 1

    def section_rlc(self) -> tuple[float, float, float]:
        seg = self.length / self.n_sections
        return self.r_per * seg, self.l_per * seg, self.c_per * seg

    def node_capacitances(self) -> np.ndarray:
        _, _, c_sec = self.section_rlc()
        c = np.full(self.n_sections + 1, c_sec)
        c[0] = c[-1] = c_sec / 2.0
        return c

    def voltage_indices(self) -> np.ndarray:
        return np.arange(0, self.state_dim, 2)

    def current_indices(self) -> np.ndarray:
        return np.arange(1, self.state_dim, 2)

    def state_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """Continuous-time (A, B) with x' = A x + B [i_local, i_remote]."""
        n = self.n_sections
        dim = self.state_dim
        r_sec, l_sec, _ = self.section_rlc()
        c_node = self.node_capacitances()
        a = np.zeros((dim, dim))
        b = np.zeros((dim, 2))
        for k in range(n + 1):
            vi = 2 * k
            if k > 0:
                a[vi, vi - 1] += 1.0 / c_node[k]      # current in from section k
            if k < n:
                a[vi, vi + 1] -= 1.0 / c_node[k]      # current out to section k+1
        b[0, 0] = 1.0 / c_node[0]
        b[-1, 1] = 1.0 / c_node[-1]
        for k in range(1, n + 1):
            ii = 2 * k - 1
            a[ii, ii - 1] = 1.0 / l_sec               # left node voltage
            a[ii, ii + 1] = -1.0 / l_sec              # right node voltage
            a[ii, ii] = -r_sec / l_sec
        return a, b


def line_derivatives(x, injections, line: LineModel) -> np.ndarray:
    """dx/dt for the line alone given terminal injections (i_local, i_remote)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (line.state_dim,):
        raise ModelShapeError(
            f"line state must have dimension {line.state_dim}, got {x.shape}")
    a, b = line.state_matrices()
    return a @ x + b @ np.asarray(injections, dtype=float)


def line_pi_phasor_response(line: LineModel, omega: float) -> np.ndarray:
    """Phasor-domain nodal solve of the same pi cascade at frequency omega.

    Returns the (n_sections+1, 2) complex transfer from the two terminal
    injection phasors to the node voltage phasors. Used as an independent
    oracle against the time-domain sinusoidal steady state.
    """
    n = self_n = line.n_sections
    r_sec, l_sec, c_sec = line.section_rlc()
    z_ser = complex(r_sec, omega * l_sec)
    y_node = 1j * omega * line.node_capacitances()
    y = np.zeros((self_n + 1, self_n + 1), dtype=complex)
    for k in range(n):
        y[k, k] += 1.0 / z_ser
        y[k + 1, k + 1] += 1.0 / z_ser
        y[k, k + 1] -= 1.0 / z_ser
        y[k + 1, k] -= 1.0 / z_ser
    y += np.diag(y_node)
    inj = np.zeros((self_n + 1, 2), dtype=complex)
    inj[0, 0] = 1.0
    inj[-1, 1] = 1.0
    return np.linalg.solve(y, inj)
