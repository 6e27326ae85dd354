"""Transient energy bookkeeping for the out-of-step relay.

Total energy = potential + kinetic, with the potential energy integrated
against the machine's electrical power curve from a reference angle and
the kinetic term 0.5*M*w^2 on the rotor speed deviation (rad/s) relative
to the oscillation-center frequency. Choosing the post-disturbance stable
equilibrium as the potential reference makes the total vanish at rest,
which is what lets "total reaches the peak potential" separate stable
from unstable swings. When no equilibrium exists the raw center-of-
oscillation angle is kept as a degraded fallback reference.
"""

from dataclasses import dataclass

import numpy as np

from ..models.errors import NumericError


@dataclass
class EnergyAssessment:
    timestamp: float
    E_k: float
    E_p: float
    barrier: float
    delta_ref: float
    delta_coo: float | None = None
    degraded: bool = False
    always_unstable: bool = False

    @property
    def E_total(self) -> float:
        return self.E_p + self.E_k


def potential_energy(delta, delta_ref, p_m, pe_curve, rel_tol=1e-8) -> float:
    """-integral from delta_ref to delta of (P_m - P_e(x)) dx.

    Adaptive Simpson quadrature to the given relative tolerance.
    """
    def f(x):
        val = p_m - pe_curve(x)
        if not np.isfinite(val):
            raise NumericError(f"power curve not finite at angle {x}")
        return val

    return -_adaptive_simpson(f, delta_ref, delta, rel_tol)


def _adaptive_simpson(f, a, b, rel_tol):
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    scale = max(abs(whole), 1e-3)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, rel_tol * scale, 30)


def _simpson_rec(f, a, b, fa, fm, fb, whole, eps, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * eps:
        return left + right + (left + right - whole) / 15.0
    return (_simpson_rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
            + _simpson_rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1))


def find_sep(pe_curve, p_m, guess, span=np.pi, tol=1e-10) -> float | None:
    """Stable equilibrium (P_m = P_e with restoring slope) nearest the guess."""
    roots = _curve_roots(pe_curve, p_m, guess - span, guess + span)
    best = None
    for r, slope in roots:
        if slope < 0.0:      # d(P_m - P_e)/dd < 0: restoring
            if best is None or abs(r - guess) < abs(best - guess):
                best = r
    return best


def stability_barrier(pe_curve, p_m, sep, tol=1e-8):
    """Barrier energy at the controlling unstable equilibrium.

    Scans from the SEP in the direction of increasing angle for the first
    P_m - P_e zero crossing with destabilizing slope (bisection refined),
    then evaluates the potential energy there. With mechanical power above
    the curve everywhere there is no equilibrium: barrier zero plus an
    always-unstable flag.
    """
    roots = _curve_roots(pe_curve, p_m, sep + 1e-6, sep + 2.0 * np.pi,
                         xtol=tol)
    for r, slope in roots:
        if slope > 0.0:      # destabilizing: the controlling UEP
            return potential_energy(r, sep, p_m, pe_curve), r, False
    return 0.0, None, True


def _curve_roots(pe_curve, p_m, lo, hi, n_scan=720, xtol=1e-10):
    xs = np.linspace(lo, hi, n_scan)
    gs = np.array([p_m - pe_curve(x) for x in xs])
    roots = []
    for k in range(len(xs) - 1):
        if gs[k] == 0.0:
            roots.append(xs[k])
        if gs[k] * gs[k + 1] < 0.0:
            a, b = xs[k], xs[k + 1]
            ga = gs[k]
            while b - a > xtol:
                m = 0.5 * (a + b)
                gm = p_m - pe_curve(m)
                if gm == 0.0:
                    a = b = m
                elif (ga > 0) == (gm > 0):
                    a, ga = m, gm
                else:
                    b = m
            roots.append(0.5 * (a + b))
    eps = 1e-7
    return [(r, ((p_m - pe_curve(r + eps)) - (p_m - pe_curve(r - eps)))
             / (2.0 * eps)) for r in roots]


def total_energy(delta, omega_rel, m_coeff, p_m, pe_curve, barrier,
                 delta_ref=None, delta_coo=None, timestamp=0.0,
                 always_unstable=False) -> EnergyAssessment:
    """Assessment of one machine sample against a precomputed barrier.

    ``omega_rel`` is the rotor speed deviation relative to the reference
    frequency (rad/s); ``m_coeff`` the Eq-style inertia coefficient
    2H/omega_s. With no resolved equilibrium the assessment is flagged
    degraded and referenced to the raw oscillation-center angle.
    """
    e_k = 0.5 * m_coeff * omega_rel**2
    degraded = delta_ref is None
    ref = delta_ref if delta_ref is not None else delta_coo
    if ref is None:
        raise ValueError("need either an equilibrium or a CoO reference angle")
    e_p = potential_energy(delta, ref, p_m, pe_curve)
    return EnergyAssessment(timestamp=timestamp, E_k=e_k, E_p=e_p,
                            barrier=barrier, delta_ref=ref,
                            delta_coo=delta_coo, degraded=degraded,
                            always_unstable=always_unstable)
