"""Compiled vs fallback kernels.

    python3 benchmarks/bench_kernels.py [--sizes 512,2048,8192] [--repeat 5]

exp_filter_sum is a two-pass recursion in the compiled core (O(N)); the
fallback runs the same recursion through scipy.signal.lfilter.  quadratic_forms is
pointwise in both.
"""

import argparse
import timeit

import numpy as np

from kgb_lab import _core, _kernels_py


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="512,2048,8192")
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args(argv)
    if _core.BACKEND != "cython":
        print("compiled extension not built; only the numpy fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16}{'N':>7}{'compiled [ms]':>15}{'fallback [ms]':>14}{'speedup':>9}{'max diff':>10}")
    for n in (int(s) for s in a.sizes.split(",")):
        g = rng.standard_normal(n)
        rho = float(np.exp(-0.66 * 120.0 / n))
        u, v = rng.standard_normal(n), rng.standard_normal(n)
        co = (1.0, 1.0, 1.0, 1.0, 0.0, 1.0)
        cases = [
            ("exp_filter_sum", lambda: _core.exp_filter_sum(g, rho), lambda: _kernels_py.exp_filter_sum(g, rho)),
            ("quadratic_forms", lambda: _core.quadratic_forms(u, v, *co), lambda: _kernels_py.quadratic_forms(u, v, *co)),
        ]
        for name, fast, slow in cases:
            tf, ts = _best(fast, a.repeat), _best(slow, a.repeat)
            diff = np.max(np.abs(np.asarray(fast()) - np.asarray(slow())))
            print(f"{name:<16}{n:>7}{tf * 1e3:>15.3f}{ts * 1e3:>14.3f}{ts / tf:>9.1f}{diff:>10.1e}")


if __name__ == "__main__":
    main()
