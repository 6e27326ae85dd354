"""Electromagnetic-transient plant for two-terminal line scenarios.

The plant is the line of interest fed by a Thevenin source at each end,
plus an external node beyond the remote terminal so that external faults
have somewhere to live. Everything is linear, so the whole plant is one
affine system x' = A x + B u with u the two source EMF waveforms; faults
toggle shunt conductances inside A, and the trapezoidal batch kernel
propagates each between-event segment in one call.

To place an internal fault at a continuous position d, the line is built
as two cascaded sub-lines [0, d] and [d, 1] sharing the fault node; the
structure (and hence the state dimension) is fixed for the whole run and
only the fault conductance switches. Each sub-line gets the same section
count, which keeps the build exactly mirror-symmetric under d -> 1 - d.
"""

from dataclasses import dataclass

import numpy as np

from ..models.line import LineModel


@dataclass(frozen=True)
class SourceSpec:
    """Thevenin source: e(t) = e_mag cos(w t + phase) behind (r, l).

    ``freq`` overrides the plant frequency for this source (imposed
    off-nominal swings); None follows the plant.
    """

    e_mag: float
    phase: float = 0.0
    r: float = 0.002
    l: float = 2.0e-4      # pu*s (X/omega_s)
    freq: float | None = None


@dataclass
class LinePlantSpec:
    line: LineModel
    src_local: SourceSpec
    src_remote: SourceSpec
    omega: float = 2.0 * np.pi * 60.0
    fault_d: float = 0.5            # internal fault position, fraction of length
    sections_per_segment: int | None = None   # default: half the line's sections


class LinePlant:
    """Fixed-structure affine plant with switchable fault conductances.

    State layout:
      [ line segment A states | fault node v | line segment B states |
        i_src_local | v_ext | i_ext_line | i_src_remote ]
    expressed concretely as one voltage/current ladder from the local
    terminal to the remote terminal (see _build), followed by the source
    and external-node states.
    """

    def __init__(self, spec: LinePlantSpec):
        self.spec = spec
        line = spec.line
        m = spec.sections_per_segment or max(1, line.n_sections // 2)
        d = min(max(spec.fault_d, 0.05), 0.95)
        seg_a = LineModel(line.r_per, line.l_per, line.c_per,
                          line.length * d, n_sections=m)
        seg_b = LineModel(line.r_per, line.l_per, line.c_per,
                          line.length * (1.0 - d), n_sections=m)
        self.seg_a, self.seg_b = seg_a, seg_b
        self._build()
        self.fault_conductance = 0.0          # at the d-node
        self.external_fault_conductance = 0.0  # at the external node

    def _build(self):
        a_mat_a, _ = self.seg_a.state_matrices()
        a_mat_b, _ = self.seg_b.state_matrices()
        na, nb = self.seg_a.state_dim, self.seg_b.state_dim
        # Merge: segment A node na-1 (its remote end) is the same node as
        # segment B node 0 (its local end). Shared node capacitance is the
        # sum of the two end halves.
        dim_line = na + nb - 1
        self.n_line = dim_line
        self.i_local_v = 0
        self.i_remote_v = dim_line - 1

        ca = self.seg_a.node_capacitances()
        cb = self.seg_b.node_capacitances()
        c_nodes = np.concatenate([ca[:-1], [ca[-1] + cb[0]], cb[1:]])
        r_a, l_a, _ = self.seg_a.section_rlc()
        r_b, l_b, _ = self.seg_b.section_rlc()

        # Ladder rebuild with merged capacitances: voltages at even
        # ladder slots, currents at odd ones, exactly like LineModel.
        n_sec_total = self.seg_a.n_sections + self.seg_b.n_sections
        a = np.zeros((dim_line, dim_line))
        for k in range(n_sec_total + 1):
            vi = 2 * k
            if k > 0:
                a[vi, vi - 1] += 1.0 / c_nodes[k]
            if k < n_sec_total:
                a[vi, vi + 1] -= 1.0 / c_nodes[k]
        for k in range(1, n_sec_total + 1):
            ii = 2 * k - 1
            r_s, l_s = (r_a, l_a) if k <= self.seg_a.n_sections else (r_b, l_b)
            a[ii, ii - 1] = 1.0 / l_s
            a[ii, ii + 1] = -1.0 / l_s
            a[ii, ii] = -r_s / l_s
        self._a_line = a
        self._c_nodes = c_nodes
        # The merged ladder's fault node sits at voltage slot 2 * seg_a.n_sections.
        self.i_fault_node = 2 * self.seg_a.n_sections

        # Full plant: line + local source current + external node (v_ext,
        # branch current ext->remote terminal) + remote source current.
        self.i_src_local = dim_line
        self.i_v_ext = dim_line + 1
        self.i_ext_branch = dim_line + 2
        self.i_src_remote = dim_line + 3
        self.dim = dim_line + 4

    def matrices(self):
        """Current (A, B) including the active fault conductances."""
        sp = self.spec
        dim = self.dim
        a = np.zeros((dim, dim))
        b = np.zeros((dim, 2))
        a[:self.n_line, :self.n_line] = self._a_line
        c0 = self._c_nodes[0]
        cn = self._c_nodes[-1]

        # local source: l di/dt = e1 - r i - v_local; injects into node 0
        s1 = sp.src_local
        a[self.i_src_local, self.i_src_local] = -s1.r / s1.l
        a[self.i_src_local, self.i_local_v] = -1.0 / s1.l
        b[self.i_src_local, 0] = 1.0 / s1.l
        a[self.i_local_v, self.i_src_local] += 1.0 / c0

        # remote source feeds the external node through half its branch,
        # external node connects to the remote terminal through the other
        # half; external node carries a small capacitance for the fault.
        s2 = sp.src_remote
        r_half, l_half = s2.r / 2.0, s2.l / 2.0
        c_ext = self._c_nodes[-1]     # same order as a line end node
        a[self.i_src_remote, self.i_src_remote] = -r_half / l_half
        a[self.i_src_remote, self.i_v_ext] = -1.0 / l_half
        b[self.i_src_remote, 1] = 1.0 / l_half
        a[self.i_v_ext, self.i_src_remote] += 1.0 / c_ext
        a[self.i_v_ext, self.i_ext_branch] -= 1.0 / c_ext
        a[self.i_ext_branch, self.i_ext_branch] = -r_half / l_half
        a[self.i_ext_branch, self.i_v_ext] = 1.0 / l_half
        a[self.i_ext_branch, self.i_remote_v] = -1.0 / l_half
        a[self.i_remote_v, self.i_ext_branch] += 1.0 / cn

        if self.fault_conductance:
            k = self.i_fault_node
            c_node = self._c_nodes[self.i_fault_node // 2]
            a[k, k] -= self.fault_conductance / c_node
        if self.external_fault_conductance:
            a[self.i_v_ext, self.i_v_ext] -= self.external_fault_conductance / c_ext
        return a, b

    def source_inputs(self, times):
        """Source EMF waveforms sampled on the given grid; shape (T, 2)."""
        sp = self.spec
        t = np.asarray(times, dtype=float)
        cols = []
        for src in (sp.src_local, sp.src_remote):
            w = 2.0 * np.pi * src.freq if src.freq is not None else sp.omega
            cols.append(src.e_mag * np.cos(w * t + src.phase))
        return np.column_stack(cols)

    def steady_state(self, t0=0.0, h=None):
        """Sinusoidal steady state at time t0, per source by superposition.

        With ``h`` given, returns the steady state of the trapezoidal
        discretization at that step instead of the continuous one, so a
        simulation started from it carries no discretization transient
        (undamped lines would otherwise ring at section frequencies).
        """
        a, b = self.matrices()
        eye = np.eye(self.dim)
        x0 = np.zeros(self.dim)
        if h is not None:
            lhs = eye - 0.5 * h * a
            f_mat = np.linalg.solve(lhs, eye + 0.5 * h * a)
            g_mat = np.linalg.solve(lhs, 0.5 * h * b)
        for col, src in enumerate((self.spec.src_local, self.spec.src_remote)):
            w = 2.0 * np.pi * src.freq if src.freq is not None else self.spec.omega
            u_ph = np.zeros(2, dtype=complex)
            u_ph[col] = src.e_mag * np.exp(1j * src.phase)
            if h is None:
                x_ph = np.linalg.solve(1j * w * eye - a, b @ u_ph)
            else:
                rot = np.exp(1j * w * h)
                x_ph = np.linalg.solve(rot * eye - f_mat,
                                       g_mat @ u_ph * (1.0 + rot))
            x0 += (x_ph * np.exp(1j * w * t0)).real
        return x0

    # Measured terminal quantities by state index
    def channel_indices(self):
        return {
            "V_local": self.i_local_v,
            "I_local": self.i_src_local,
            "V_remote": self.i_remote_v,
            "I_remote": self.i_ext_branch,
        }
