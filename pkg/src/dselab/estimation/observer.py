"""Luenberger-style observer design and recursion.

Gain design is pole placement on (A - L C): Ackermann's formula for a
single output, scipy's place_poles for several. The recursion itself is
the plain copy-of-the-plant form driven by the output error; unlike a
filter there is no covariance and the gain never adapts.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import place_poles


class ObservabilityError(ValueError):
    def __init__(self, rank, n):
        super().__init__(
            f"(A, C) pair unobservable: observability matrix rank {rank} < {n}")
        self.rank = rank
        self.n = n


@dataclass
class ObserverDesign:
    a: np.ndarray
    c: np.ndarray
    gain: np.ndarray
    poles: tuple
    b: np.ndarray | None = None


def observability_matrix(a, c):
    n = a.shape[0]
    blocks = [c]
    for _ in range(n - 1):
        blocks.append(blocks[-1] @ a)
    return np.vstack(blocks)


def design_observer(a, c, poles, b=None) -> ObserverDesign:
    """Gain L placing the eigenvalues of (A - L C) at the target poles."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    c = np.atleast_2d(np.asarray(c, dtype=float))
    n = a.shape[0]
    obs = observability_matrix(a, c)
    rank = np.linalg.matrix_rank(obs)
    if rank < n:
        raise ObservabilityError(rank, n)

    poles = tuple(poles)
    if c.shape[0] == 1:
        gain = _ackermann_gain(a, c, poles)
    else:
        res = place_poles(a.T, c.T, np.asarray(poles))
        gain = res.gain_matrix.T

    achieved = np.linalg.eigvals(a - gain @ c)
    want = np.sort_complex(np.asarray(poles, dtype=complex))
    got = np.sort_complex(achieved)
    if np.max(np.abs(want - got)) > 1e-6:
        raise ValueError(f"pole placement failed: wanted {want}, got {got}")
    return ObserverDesign(a=a, c=c, gain=gain, poles=poles,
                          b=None if b is None else np.atleast_2d(b))


def _ackermann_gain(a, c, poles):
    # L = q(A) O^-1 e_n with q the desired characteristic polynomial.
    n = a.shape[0]
    coeffs = np.real(np.poly(np.asarray(poles, dtype=complex)))
    qa = np.zeros_like(a)
    for k, ck in enumerate(coeffs):
        qa += ck * np.linalg.matrix_power(a, n - k)
    e_n = np.zeros((n, 1))
    e_n[-1, 0] = 1.0
    obs = observability_matrix(a, c)
    return qa @ np.linalg.solve(obs, e_n)


def observer_step(design: ObserverDesign, x_hat, z, u=None):
    """x+ = A x + B u + L (z - C x)."""
    x_hat = np.asarray(x_hat, dtype=float)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    pred = design.a @ x_hat
    if u is not None and design.b is not None:
        pred = pred + design.b @ np.atleast_1d(u)
    return pred + (design.gain @ (z - design.c @ x_hat)).ravel()
