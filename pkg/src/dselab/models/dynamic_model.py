"""Generic DAE container used by the simulator and the filters."""

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ModelShapeError

STATE_LABELS = (
    "angle",
    "speed-deviation",
    "flux-emf",
    "inductor-current",
    "capacitor-voltage",
    "controller-state",
    "parameter",
)


@dataclass
class StateVector:
    """Ordered state values with one semantic tag per entry."""

    values: np.ndarray
    labels: tuple

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or len(self.values) != len(self.labels):
            raise ModelShapeError("state length must match its label list")
        for lab in self.labels:
            if lab not in STATE_LABELS:
                raise ModelShapeError(f"unknown state label {lab!r}")


@dataclass
class DynamicModel:
    """The (f, g, h) triple with dimension descriptors.

    ``f(x, y, u)`` returns dx/dt; ``g_solve(x, u)`` returns the algebraic
    vector satisfying g=0 (empty array when the model has no algebraic
    part); ``h(x, y, u)`` returns the measurement vector matching
    ``channel_names``. All three must be pure functions.

    Models whose dynamics are affine, x' = A x + B u with no algebraic
    part, may set ``affine=(A, B)``; the simulator and filters then use an
    exact trapezoidal update instead of the fixed-point iteration.
    """

    n_states: int
    state_labels: tuple
    f: Callable
    g_solve: Callable
    h: Callable
    channel_names: tuple = ()
    n_inputs: int = 0
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))
    affine: tuple | None = None

    def __post_init__(self):
        if len(self.state_labels) != self.n_states:
            raise ModelShapeError("state label count must equal n_states")
        if self.affine is not None:
            a, b = self.affine
            if a.shape != (self.n_states, self.n_states):
                raise ModelShapeError("affine A must be n_states x n_states")
            if b.shape[0] != self.n_states:
                raise ModelShapeError("affine B row count must equal n_states")


def wrap_angle(theta):
    """Wrap angles to (-pi, pi]; used only at reporting boundaries."""
    theta = np.asarray(theta, dtype=float)
    wrapped = np.mod(theta + np.pi, 2.0 * np.pi) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    return wrapped if wrapped.ndim else float(wrapped)
