# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.  Signatures mirror kgb_lab._kernels_py."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def exp_filter_sum(const double[::1] g, double rho):
    """out[i] = sum_j rho**|i-j| * g[j], by a forward and a backward recursion."""
    cdef Py_ssize_t n = g.shape[0], i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double acc = 0.0
    for i in range(n):
        acc = rho * acc + g[i]
        out[i] = acc
    acc = 0.0
    for i in range(n - 1, -1, -1):
        out[i] += rho * acc
        acc = rho * acc + g[i]
    return out_arr


def quadratic_forms(const double[::1] u, const double[::1] v,
                    double a_uu, double a_uv, double a_vv,
                    double b_uu, double b_uv, double b_vv):
    """f1 = a_uu u^2 + 2 a_uv uv + a_vv v^2 and f2 likewise with b, in one pass."""
    cdef Py_ssize_t n = u.shape[0], i
    f1_arr = np.empty(n, dtype=np.float64)
    f2_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] f1 = f1_arr
    cdef double[::1] f2 = f2_arr
    cdef double uu, uv, vv
    for i in range(n):
        uu = u[i] * u[i]
        uv = 2.0 * u[i] * v[i]
        vv = v[i] * v[i]
        f1[i] = a_uu * uu + a_uv * uv + a_vv * vv
        f2[i] = b_uu * uu + b_uv * uv + b_vv * vv
    return f1_arr, f2_arr
