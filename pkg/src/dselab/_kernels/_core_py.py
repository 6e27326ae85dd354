"""NumPy fallback for the hot kernels.

Two batch loops dominate sampled-value workloads: propagating an affine
model with the trapezoidal rule over a whole window, and running the
linear Kalman recursion over a whole measurement window. The compiled
extension (_core.pyx) implements the same two entry points; this module
is the drop-in used when the extension is absent.
"""

import numpy as np

BACKEND = "python"


def affine_trap_run(F, G, u_mid, x0):
    """Iterate x_{k+1} = F x_k + G u_mid_k.

    F and G are the precomputed trapezoidal update matrices
    (I - hA/2)^-1 (I + hA/2) and (I - hA/2)^-1 (h/2) B; u_mid holds
    u_k + u_{k+1} per step. Returns the (T+1, n) state history.
    """
    F = np.ascontiguousarray(F, dtype=float)
    G = np.ascontiguousarray(G, dtype=float)
    u_mid = np.atleast_2d(np.asarray(u_mid, dtype=float))
    steps = u_mid.shape[0]
    n = F.shape[0]
    out = np.empty((steps + 1, n))
    out[0] = x0
    x = np.asarray(x0, dtype=float)
    for k in range(steps):
        x = F @ x + G @ u_mid[k]
        out[k + 1] = x
    return out

def kf_affine_run(F, G, u_mid, H, Q, R, x0, P0, Z, miss=None):
    """Linear Kalman recursion over a measurement window.

    One predict/update per row of Z; miss (same shape as Z, nonzero for
    unusable entries) drops measurement rows. Returns a dict with the
    posterior means/covariances, pre-update measurement predictions,
    innovations (NaN where missing), per-step chi-square statistics and
    the per-step degree-of-freedom count.
    """
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    u_mid = np.atleast_2d(np.asarray(u_mid, dtype=float))
    H = np.asarray(H, dtype=float)
    Q = np.asarray(Q, dtype=float)
    R = np.asarray(R, dtype=float)
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    T, m = Z.shape
    n = F.shape[0]
    if miss is None:
        miss = np.zeros((T, m), dtype=np.uint8)
    else:
        miss = np.asarray(miss, dtype=np.uint8)

    x = np.asarray(x0, dtype=float).copy()
    P = np.asarray(P0, dtype=float).copy()
    means = np.empty((T, n))
    covs = np.empty((T, n, n))
    zpred = np.empty((T, m))
    innov = np.full((T, m), np.nan)
    chi2 = np.zeros(T)
    dof = np.zeros(T, dtype=np.int64)
    eye = np.eye(n)

    for k in range(T):
        x = F @ x + G @ u_mid[k]
        P = F @ P @ F.T + Q
        zpred[k] = H @ x
        use = np.flatnonzero(miss[k] == 0)
        dof[k] = len(use)
        if len(use):
            Hk = H[use]
            nu = Z[k, use] - zpred[k, use]
            S = Hk @ P @ Hk.T + R[np.ix_(use, use)]
            c = np.linalg.cholesky(S)
            sinv_nu = _cho_solve(c, nu)
            K = _cho_solve_mat(c, Hk @ P).T
            x = x + K @ nu
            P = (eye - K @ Hk) @ P
            innov[k, use] = nu
            chi2[k] = float(nu @ sinv_nu)
        P = 0.5 * (P + P.T)
        means[k] = x
        covs[k] = P
    return {"means": means, "covs": covs, "zpred": zpred, "innov": innov,
            "chi2": chi2, "dof": dof}


def _cho_solve(c, b):
    y = np.linalg.solve(c, b)
    return np.linalg.solve(c.T, y)


def _cho_solve_mat(c, b):
    y = np.linalg.solve(c, b)
    return np.linalg.solve(c.T, y)
