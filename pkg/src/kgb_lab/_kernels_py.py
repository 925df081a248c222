"""Numpy/scipy implementations of the compiled kernels (used when the extension is absent)."""

import numpy as np
from scipy.signal import lfilter


def exp_filter_sum(g, rho):
    """out[i] = sum_j rho**|i-j| * g[j], as a forward and a backward first-order recursion."""
    g = np.ascontiguousarray(g, dtype=float)
    if g.size == 0:
        return g.copy()
    a = [1.0, -float(rho)]
    fwd = lfilter([1.0], a, g)
    bwd = lfilter([1.0], a, g[::-1])[::-1]
    return fwd + bwd - g


def quadratic_forms(u, v, a_uu, a_uv, a_vv, b_uu, b_uv, b_vv):
    uu = u * u
    uv = 2.0 * u * v
    vv = v * v
    return a_uu * uu + a_uv * uv + a_vv * vv, b_uu * uu + b_uv * uv + b_vv * vv
