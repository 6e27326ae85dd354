"""Machine-plus-network DAE assembly for electromechanical scenarios."""

from dataclasses import dataclass, field

import numpy as np

from ..models import machine as mach
from ..models.dynamic_model import DynamicModel
from ..models.network import NetworkModel


@dataclass
class MachineSpec:
    """Roster entry: one machine, its bus, model order and operating point.

    ``p_m`` and ``e_fd`` are normally left unset and derived so that the
    scenario starts at an exact equilibrium of the solved network.
    """

    name: str
    bus: int
    params: mach.MachineParams
    variant: str = mach.CLASSICAL
    delta0: float = 0.0
    domega0: float = 0.0
    emf: float = 1.0                 # E' magnitude (classical) or Eq_p0 (two-axis)
    p_m: float | None = None
    e_fd: float | None = None


class ElectromechModel:
    """Packs machine states into one vector over a shared network.

    State layout: machines in roster order, classical contributing
    (delta, domega) and two-axis (delta, domega, Eq_p, Ed_p). The
    algebraic vector is the complex bus voltage array. Inputs are a dict
    name -> MachineInput, treated as piecewise constant.
    """

    def __init__(self, network: NetworkModel, specs: list[MachineSpec]):
        self.network = network
        self.specs = list(specs)
        self.slices = {}
        self.labels = []
        pos = 0
        for sp in self.specs:
            width = 2 if sp.variant == mach.CLASSICAL else 4
            self.slices[sp.name] = slice(pos, pos + width)
            self.labels += ["angle", "speed-deviation"]
            if width == 4:
                self.labels += ["flux-emf", "flux-emf"]
            pos += width
        self.n_states = pos
        self.labels = tuple(self.labels)
        self._emf = {sp.name: sp.emf for sp in self.specs}
        self.affine = None

    def unpack(self, x) -> dict:
        states = {}
        for sp in self.specs:
            states[sp.name] = mach.MachineState.from_array(
                x[self.slices[sp.name]], sp.variant, emf=self._emf[sp.name])
        return states

    def g_solve(self, x, u):
        sol = self.network.solve(self.unpack(x))
        return sol.voltages

    def solve_full(self, x):
        return self.network.solve(self.unpack(x))

    def f(self, x, y, u):
        states = self.unpack(x)
        dx = np.empty(self.n_states)
        for sp in self.specs:
            st = states[sp.name]
            d = mach.machine_derivatives(st, y[sp.bus], u[sp.name],
                                         sp.params, sp.variant)
            dx[self.slices[sp.name]] = d
        return dx

    def h(self, x, y, u):
        sol = self.solve_full(x)
        return np.array([sol.P_e[sp.name] for sp in self.specs])

    def as_dynamic_model(self) -> DynamicModel:
        return DynamicModel(
            n_states=self.n_states,
            state_labels=self.labels,
            f=self.f,
            g_solve=self.g_solve,
            h=self.h,
            channel_names=tuple(f"{sp.name}.P" for sp in self.specs),
        )


def initialize_equilibrium(model: ElectromechModel,
                           max_iter: int = 60, tol: float = 1e-13):
    """Exact equilibrium from the roster's angles and EMF magnitudes.

    Two-axis Ed' is fixed-point iterated against the solved voltages;
    mechanical power and field voltage are then set to hold every
    derivative at zero. Returns (x0, u0, solution).
    """
    x0 = np.zeros(model.n_states)
    for sp in model.specs:
        sl = model.slices[sp.name]
        x0[sl.start] = sp.delta0
        x0[sl.start + 1] = sp.domega0
        if sp.variant == mach.TWO_AXIS:
            x0[sl.start + 2] = sp.emf
            x0[sl.start + 3] = 0.0

    sol = model.solve_full(x0)
    for _ in range(max_iter):
        moved = 0.0
        for sp in model.specs:
            if sp.variant != mach.TWO_AXIS:
                continue
            sl = model.slices[sp.name]
            v = sol.voltages[sp.bus]
            v_d = (v * np.exp(-1j * (x0[sl.start] - np.pi / 2.0))).real
            ed_new = (sp.params.Xq - sp.params.Xq_p) * v_d / sp.params.Xq
            moved = max(moved, abs(ed_new - x0[sl.start + 3]))
            x0[sl.start + 3] = ed_new
        sol = model.solve_full(x0)
        if moved <= tol:
            break

    u0 = {}
    states = model.unpack(x0)
    for sp in model.specs:
        p_m = sp.p_m if sp.p_m is not None else sol.P_e[sp.name]
        if sp.e_fd is not None:
            e_fd = sp.e_fd
        elif sp.variant == mach.TWO_AXIS:
            e_fd = mach.field_voltage_for_equilibrium(
                states[sp.name], sol.voltages[sp.bus], sp.params)
        else:
            e_fd = 0.0
        u0[sp.name] = mach.MachineInput(P_m=p_m, E_fd=e_fd)
    return x0, u0, sol
