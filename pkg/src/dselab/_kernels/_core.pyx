# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: batch trapezoidal propagation and the linear
Kalman recursion over a sampled-value window. Mirrors _core_py exactly;
dimensions here are small (n, m <= ~32), so plain C loops beat BLAS call
overhead.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def affine_trap_run(F, G, u_mid, x0):
    """Iterate x_{k+1} = F x_k + G u_mid_k; returns the (T+1, n) history."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] F_ = np.ascontiguousarray(F, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] G_ = np.ascontiguousarray(G, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] U_ = np.ascontiguousarray(
        np.atleast_2d(np.asarray(u_mid, dtype=np.float64)))
    cdef Py_ssize_t steps = U_.shape[0]
    cdef Py_ssize_t n = F_.shape[0]
    cdef Py_ssize_t m = G_.shape[1]
    cdef cnp.ndarray[double, ndim=2, mode="c"] out = np.empty((steps + 1, n))
    cdef cnp.ndarray[double, ndim=1, mode="c"] x = np.ascontiguousarray(x0, dtype=np.float64).copy()
    cdef cnp.ndarray[double, ndim=1, mode="c"] xn = np.empty(n)
    cdef Py_ssize_t k, i, j
    cdef double acc
    for i in range(n):
        out[0, i] = x[i]
    for k in range(steps):
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += F_[i, j] * x[j]
            for j in range(m):
                acc += G_[i, j] * U_[k, j]
            xn[i] = acc
        for i in range(n):
            x[i] = xn[i]
            out[k + 1, i] = xn[i]
    return out


cdef int _chol(double* a, Py_ssize_t m) nogil:
    # In-place lower Cholesky of a (m x m, row-major); returns 0 on success.
    cdef Py_ssize_t i, j, k
    cdef double s
    for i in range(m):
        for j in range(i + 1):
            s = a[i * m + j]
            for k in range(j):
                s -= a[i * m + k] * a[j * m + k]
            if i == j:
                if s <= 0.0:
                    return -1
                a[i * m + i] = s ** 0.5
            else:
                a[i * m + j] = s / a[j * m + j]
    return 0


cdef void _chol_solve(double* c, double* b, Py_ssize_t m) nogil:
    # Solve (L L^T) x = b in place using the factor from _chol.
    cdef Py_ssize_t i, k
    cdef double s
    for i in range(m):
        s = b[i]
        for k in range(i):
            s -= c[i * m + k] * b[k]
        b[i] = s / c[i * m + i]
    for i in range(m - 1, -1, -1):
        s = b[i]
        for k in range(i + 1, m):
            s -= c[k * m + i] * b[k]
        b[i] = s / c[i * m + i]


def kf_affine_run(F, G, u_mid, H, Q, R, x0, P0, Z, miss=None):
    """Linear Kalman recursion over a window; see the fallback docstring."""
    cdef cnp.ndarray[double, ndim=2, mode="c"] F_ = np.ascontiguousarray(F, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] G_ = np.ascontiguousarray(G, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] U_ = np.ascontiguousarray(
        np.atleast_2d(np.asarray(u_mid, dtype=np.float64)))
    cdef cnp.ndarray[double, ndim=2, mode="c"] H_ = np.ascontiguousarray(H, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] Q_ = np.ascontiguousarray(Q, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] R_ = np.ascontiguousarray(R, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] Z_ = np.ascontiguousarray(
        np.atleast_2d(np.asarray(Z, dtype=np.float64)))
    cdef Py_ssize_t T = Z_.shape[0]
    cdef Py_ssize_t m = Z_.shape[1]
    cdef Py_ssize_t n = F_.shape[0]
    cdef Py_ssize_t nu_in = G_.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, mode="c"] miss_
    if miss is None:
        miss_ = np.zeros((T, m), dtype=np.uint8)
    else:
        miss_ = np.ascontiguousarray(miss, dtype=np.uint8)

    cdef cnp.ndarray[double, ndim=2, mode="c"] means = np.empty((T, n))
    cdef cnp.ndarray[double, ndim=3, mode="c"] covs = np.empty((T, n, n))
    cdef cnp.ndarray[double, ndim=2, mode="c"] zpred = np.empty((T, m))
    cdef cnp.ndarray[double, ndim=2, mode="c"] innov = np.full((T, m), np.nan)
    cdef cnp.ndarray[double, ndim=1, mode="c"] chi2 = np.zeros(T)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] dof = np.zeros(T, dtype=np.int64)

    cdef cnp.ndarray[double, ndim=1, mode="c"] x = np.ascontiguousarray(x0, dtype=np.float64).copy()
    cdef cnp.ndarray[double, ndim=2, mode="c"] P = np.ascontiguousarray(P0, dtype=np.float64).copy()

    # scratch
    cdef cnp.ndarray[double, ndim=1, mode="c"] xp = np.empty(n)
    cdef cnp.ndarray[double, ndim=2, mode="c"] FP = np.empty((n, n))
    cdef cnp.ndarray[double, ndim=2, mode="c"] Pp = np.empty((n, n))
    cdef cnp.ndarray[double, ndim=2, mode="c"] Hk = np.empty((m, n))
    cdef cnp.ndarray[double, ndim=2, mode="c"] PHt = np.empty((n, m))
    # S packed contiguously at the active dimension mu (not the full m)
    cdef cnp.ndarray[double, ndim=1, mode="c"] S = np.empty(m * m)
    cdef cnp.ndarray[double, ndim=1, mode="c"] nu = np.empty(m)
    cdef cnp.ndarray[double, ndim=1, mode="c"] snu = np.empty(m)
    cdef cnp.ndarray[double, ndim=2, mode="c"] K = np.empty((n, m))
    cdef cnp.ndarray[double, ndim=2, mode="c"] KH = np.empty((n, n))
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] use = np.empty(m, dtype=np.int64)

    cdef Py_ssize_t k, i, j, l, mu, a, b
    cdef double acc

    for k in range(T):
        # predict: xp = F x + G u, Pp = F P F^T + Q
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += F_[i, j] * x[j]
            for j in range(nu_in):
                acc += G_[i, j] * U_[k, j]
            xp[i] = acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for l in range(n):
                    acc += F_[i, l] * P[l, j]
                FP[i, j] = acc
        for i in range(n):
            for j in range(n):
                acc = Q_[i, j]
                for l in range(n):
                    acc += FP[i, l] * F_[j, l]
                Pp[i, j] = acc
        for i in range(m):
            acc = 0.0
            for j in range(n):
                acc += H_[i, j] * xp[j]
            zpred[k, i] = acc

        mu = 0
        for i in range(m):
            if miss_[k, i] == 0:
                use[mu] = i
                mu += 1
        dof[k] = mu

        if mu == 0:
            for i in range(n):
                x[i] = xp[i]
                for j in range(n):
                    P[i, j] = 0.5 * (Pp[i, j] + Pp[j, i])
        else:
            for i in range(mu):
                a = use[i]
                nu[i] = Z_[k, a] - zpred[k, a]
                for j in range(n):
                    Hk[i, j] = H_[a, j]
            # PHt = Pp Hk^T ; S = Hk PHt + R[use, use]
            for i in range(n):
                for j in range(mu):
                    acc = 0.0
                    for l in range(n):
                        acc += Pp[i, l] * Hk[j, l]
                    PHt[i, j] = acc
            for i in range(mu):
                a = use[i]
                for j in range(mu):
                    b = use[j]
                    acc = R_[a, b]
                    for l in range(n):
                        acc += Hk[i, l] * PHt[l, j]
                    S[i * mu + j] = acc
            if _chol(&S[0], mu) != 0:
                raise np.linalg.LinAlgError(
                    "innovation covariance not positive definite")
            for i in range(mu):
                snu[i] = nu[i]
            _chol_solve(&S[0], &snu[0], mu)
            acc = 0.0
            for i in range(mu):
                acc += nu[i] * snu[i]
            chi2[k] = acc
            # K = PHt S^-1  (solve column-wise: K^T rows)
            for i in range(n):
                for j in range(mu):
                    K[i, j] = PHt[i, j]
            for i in range(n):
                _chol_solve(&S[0], &K[i, 0], mu)
            for i in range(n):
                acc = xp[i]
                for j in range(mu):
                    acc += K[i, j] * nu[j]
                x[i] = acc
            for i in range(n):
                for j in range(n):
                    acc = 0.0
                    for l in range(mu):
                        acc += K[i, l] * Hk[l, j]
                    KH[i, j] = acc
            for i in range(n):
                for j in range(n):
                    acc = Pp[i, j]
                    for l in range(n):
                        acc -= KH[i, l] * Pp[l, j]
                    FP[i, j] = acc        # reuse FP as P_post scratch
            for i in range(n):
                for j in range(n):
                    P[i, j] = 0.5 * (FP[i, j] + FP[j, i])
            for i in range(mu):
                innov[k, use[i]] = nu[i]

        for i in range(n):
            means[k, i] = x[i]
            for j in range(n):
                covs[k, i, j] = P[i, j]

    return {"means": means, "covs": covs, "zpred": zpred, "innov": innov,
            "chi2": chi2, "dof": dof}
