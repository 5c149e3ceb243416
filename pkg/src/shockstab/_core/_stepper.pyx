# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stepper kernels (hot lane).

Signature-compatible with shockstab._core.fallback; see that module for
the array conventions.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def hyperbolic_rhs(double[:, ::1] flux_ext, double[:, ::1] w_ext,
                   double[::1] alpha_ext, double h, double kappa,
                   double[:, ::1] out):
    cdef Py_ssize_t N = out.shape[0]
    cdef Py_ssize_t n = out.shape[1]
    cdef Py_ssize_t i, c
    cdef double a_lo, a_hi, fh_prev, fh
    cdef double inv_h = 1.0 / h
    for c in range(n):
        a_lo = alpha_ext[1] if alpha_ext[1] > alpha_ext[2] else alpha_ext[2]
        fh_prev = 0.5 * (flux_ext[1, c] + flux_ext[2, c]) + kappa * a_lo * (
            w_ext[3, c] - 3.0 * w_ext[2, c] + 3.0 * w_ext[1, c] - w_ext[0, c])
        for i in range(1, N + 1):
            a_hi = alpha_ext[i + 1] if alpha_ext[i + 1] > alpha_ext[i + 2] \
                else alpha_ext[i + 2]
            fh = 0.5 * (flux_ext[i + 1, c] + flux_ext[i + 2, c]) \
                + kappa * a_hi * (w_ext[i + 3, c] - 3.0 * w_ext[i + 2, c]
                                  + 3.0 * w_ext[i + 1, c] - w_ext[i, c])
            out[i - 1, c] = -(fh - fh_prev) * inv_h
            fh_prev = fh
    return np.asarray(out)


def diffusion_rhs(double[:, ::1] w_ext, double[:, ::1] b_iface, double h,
                  double[:, ::1] out):
    cdef Py_ssize_t N = out.shape[0]
    cdef Py_ssize_t n = out.shape[1]
    cdef Py_ssize_t i, c
    cdef double inv_h2 = 1.0 / (h * h)
    cdef double dwl, dwr
    for c in range(n):
        for i in range(N):
            dwr = w_ext[i + 3, c] - w_ext[i + 2, c]
            dwl = w_ext[i + 2, c] - w_ext[i + 1, c]
            out[i, c] = (b_iface[i + 1, c] * dwr - b_iface[i, c] * dwl) * inv_h2
    return np.asarray(out)


def thomas_batch(double[:, ::1] dl, double[:, ::1] d, double[:, ::1] du,
                 double[:, ::1] rhs):
    cdef Py_ssize_t m = d.shape[0]
    cdef Py_ssize_t N = d.shape[1]
    cdef Py_ssize_t k, i
    cdef double denom
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(N)
    cdef double[::1] c = scratch
    for k in range(m):
        denom = d[k, 0]
        c[0] = du[k, 0] / denom
        rhs[k, 0] = rhs[k, 0] / denom
        for i in range(1, N):
            denom = d[k, i] - dl[k, i] * c[i - 1]
            c[i] = du[k, i] / denom
            rhs[k, i] = (rhs[k, i] - dl[k, i] * rhs[k, i - 1]) / denom
        for i in range(N - 2, -1, -1):
            rhs[k, i] = rhs[k, i] - c[i] * rhs[k, i + 1]
    return np.asarray(rhs)
