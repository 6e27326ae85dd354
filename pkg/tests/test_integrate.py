"""Trapezoidal stepper checks: closed forms, convergence order, failure."""

import numpy as np
import pytest

from dselab.models import MachineInput, MachineParams, MachineState, NetworkModel
from dselab.models.dynamic_model import DynamicModel
from dselab.simulator import (
    AffineStepper,
    ElectromechModel,
    MachineSpec,
    StepFailureError,
    initialize_equilibrium,
    integrate_step,
)


def _scalar_model(lam, affine=False):
    a = np.array([[lam]])
    b = np.zeros((1, 0))
    return DynamicModel(
        n_states=1, state_labels=("controller-state",),
        f=lambda x, y, u: a @ x,
        g_solve=lambda x, u: np.zeros(0),
        h=lambda x, y, u: x,
        affine=(a, b) if affine else None,
    )


def test_zero_derivative_holds_state_bit_exact():
    model = DynamicModel(
        n_states=3, state_labels=("angle", "speed-deviation", "flux-emf"),
        f=lambda x, y, u: np.zeros(3),
        g_solve=lambda x, u: np.zeros(0),
        h=lambda x, y, u: x)
    x = np.array([0.3, -1.7, 2.5])
    x1, _ = integrate_step(model, x, np.zeros(0), None, h=0.01)
    assert (x1 == x).all()


@pytest.mark.parametrize("affine", [False, True])
def test_scalar_linear_matches_trapezoidal_closed_form(affine):
    lam, h, x0 = -2.0, 0.01, 1.5
    model = _scalar_model(lam, affine=affine)
    x1, _ = integrate_step(model, np.array([x0]), np.zeros(0),
                           np.zeros(0), h=h)
    expected = x0 * (1 + lam * h / 2) / (1 - lam * h / 2)
    tol = 1e-14 if affine else 1e-9
    assert x1[0] == pytest.approx(expected, rel=tol)


def _smib_model():
    net = NetworkModel(2)
    net.add_branch(0, 1, r=0.0, x=0.2, tag="tie")
    net.set_fixed_voltage(1, 1.0 + 0j)
    params = MachineParams(H=4.0, D=0.0, Xd_p=0.3)
    spec = MachineSpec("g1", 0, params, "classical", delta0=0.6, emf=1.1)
    net.attach_machine("g1", 0, params, "classical")
    return ElectromechModel(net, [spec])


def test_swing_convergence_order_at_least_1p9():
    # Undamped SMIB released off-equilibrium; Richardson study against a
    # fine-step reference, halving h four times.
    model = _smib_model()
    x_eq, u, _ = initialize_equilibrium(model)
    u = {"g1": MachineInput(P_m=u["g1"].P_m + 0.3)}    # constant imbalance
    t_end = 0.5

    def run(h):
        x = x_eq.copy()
        y = model.g_solve(x, u)
        for _ in range(int(round(t_end / h))):
            x, y = integrate_step(model, x, y, u, h, tol=1e-13)
        return x

    ref = run(t_end / 4096)
    errs = []
    for k in range(5):
        h = 0.02 / 2**k
        errs.append(np.max(np.abs(run(h) - ref)))
    orders = [np.log2(errs[k] / errs[k + 1]) for k in range(4)]
    assert min(orders) >= 1.9, f"observed orders {orders}"


def test_step_failure_reports_time_and_suggestion():
    # dx/dt = x^2 from x=1 with an absurd step: fixed point diverges.
    model = DynamicModel(
        n_states=1, state_labels=("controller-state",),
        f=lambda x, y, u: x**2,
        g_solve=lambda x, u: np.zeros(0),
        h=lambda x, y, u: x)
    with pytest.raises(StepFailureError) as exc:
        integrate_step(model, np.array([1.0]), np.zeros(0), None, h=5.0, t=2.5)
    assert exc.value.time == 2.5
    assert "smaller step" in str(exc.value)


def test_affine_stepper_batch_matches_stepwise():
    rng = np.random.default_rng(7)
    a = -np.eye(3) + 0.3 * rng.standard_normal((3, 3))
    b = rng.standard_normal((3, 2))
    h = 0.01
    stepper = AffineStepper((a, b), h)
    u_seq = rng.standard_normal((11, 2))
    x0 = rng.standard_normal(3)
    hist = stepper.run(x0, u_seq)
    x = x0
    for k in range(10):
        x = stepper.step(x, u_seq[k] + u_seq[k + 1])
    assert np.allclose(hist[-1], x, atol=1e-14)


def test_equilibrium_initialization_is_exact():
    model = _smib_model()
    x0, u0, sol = initialize_equilibrium(model)
    dx = model.f(x0, sol.voltages, u0)
    assert np.max(np.abs(dx)) < 1e-12
