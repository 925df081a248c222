"""Long-wave check: evolve KdV-soliton data under the full system and measure
the sup-norm distance to (eps^2 psi_u, 0) as eps shrinks.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy import stats

from . import errors
from .closed_form import KdVAnsatz
from .evolution import EvolutionConfig, EvolutionState, evolve
from .model import ModelCoefficients
from .spectral import PeriodicGrid, build_grid

log = logging.getLogger(__name__)

MIN_EPS_L = 40.0
DEFAULT_COEFFS = dict(a_uu=1.0, a_uv=1.0, a_vv=1.0, b_uu=1.0, b_uv=1.0, b_vv=1.0)


def build_initial_data(eps: float, c: float, alpha: float, a_uu: float, grid: PeriodicGrid):
    """(u0, u1, v0, v1) with u0 = eps^2 psi(x, 0), u1 its exact time derivative, v0 = v1 = 0."""
    if eps * grid.L < MIN_EPS_L:
        raise errors.GridTooShort(f"eps * L = {eps * grid.L:.4g} < {MIN_EPS_L:g}")
    ans = KdVAnsatz(eps, c, alpha, a_uu)
    u0 = ans.profile(grid.x)
    u1 = ans.time_derivative(grid.x)
    u1 = u1 - u1.mean()
    zero = np.zeros(grid.N)
    return u0, u1, zero, zero.copy()


@dataclass
class KdvErrorTable:
    epsilon: List[float] = field(default_factory=list)
    t: List[float] = field(default_factory=list)
    err_u: List[float] = field(default_factory=list)
    err_v: List[float] = field(default_factory=list)

    def add(self, eps, t, eu, ev):
        self.epsilon.append(float(eps))
        self.t.append(float(t))
        self.err_u.append(float(eu))
        self.err_v.append(float(ev))

    def extend(self, other: "KdvErrorTable"):
        for row in other.rows():
            self.add(*row)

    def rows(self):
        return list(zip(self.epsilon, self.t, self.err_u, self.err_v))

    def epsilons(self) -> List[float]:
        return sorted(set(self.epsilon), reverse=True)

    def series(self, eps: float):
        e = np.asarray(self.epsilon)
        sel = e == eps
        return np.asarray(self.t)[sel], np.asarray(self.err_u)[sel], np.asarray(self.err_v)[sel]

    def max_error(self, eps: float, component: str = "both") -> float:
        _, eu, ev = self.series(eps)
        if component == "u":
            return float(eu.max())
        if component == "v":
            return float(ev.max())
        return float(np.maximum(eu, ev).max())


def measure_error(states: Iterable[EvolutionState], eps: float, c: float, alpha: float, a_uu: float) -> KdvErrorTable:
    ans = KdVAnsatz(eps, c, alpha, a_uu)
    table = KdvErrorTable()
    for st in states:
        ref = ans.profile(st.grid.x, st.t, period=2.0 * st.grid.L)
        table.add(eps, st.t, np.max(np.abs(st.u - ref)), np.max(np.abs(st.v)))
    return table


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r2: float
    slope_ci: tuple  # 95% interval, (nan, nan) with fewer than 3 points


def fit_exponent(table_or_pairs, component: str = "both") -> ExponentFit:
    """Least squares of log(max_t error) against log(eps)."""
    if isinstance(table_or_pairs, KdvErrorTable):
        eps = np.array(table_or_pairs.epsilons())
        err = np.array([table_or_pairs.max_error(e, component) for e in eps])
    else:
        eps, err = (np.asarray(a, dtype=float) for a in zip(*table_or_pairs))
    if eps.size < 2:
        raise errors.ValidationError("need at least two epsilon values to fit an exponent")
    if np.any(err <= 0):
        raise errors.ValidationError("errors must be positive to take logarithms")
    reg = stats.linregress(np.log(eps), np.log(err))
    if eps.size > 2:
        tq = stats.t.ppf(0.975, eps.size - 2)
        ci = (reg.slope - tq * reg.stderr, reg.slope + tq * reg.stderr)
    else:
        ci = (float("nan"), float("nan"))
    return ExponentFit(float(reg.slope), float(reg.intercept), float(reg.rvalue**2), tuple(float(q) for q in ci))


def bounded_in_time(t, err, growth: float = 0.2) -> bool:
    """Max attained by T/2, or the second half exceeds the first by < growth."""
    t, err = np.asarray(t), np.asarray(err)
    half = t <= 0.5 * t[-1]
    first, second = err[half].max(), err[~half].max() if np.any(~half) else 0.0
    return bool(second <= first * (1.0 + growth))


def experiment_grid(eps: float, T: float, alpha: float, h_max: float = 0.5) -> PeriodicGrid:
    """L = alpha T + 40/eps and N the next power of two with h <= h_max."""
    L = abs(alpha) * T + MIN_EPS_L / eps
    N = int(2 ** np.ceil(np.log2(2.0 * L / h_max)))
    return build_grid(L, max(N, 8))


@dataclass(frozen=True)
class KdvRun:
    eps: float
    T: float = 100.0
    c: float = 0.8
    alpha: float = 1.0
    dt: float = 0.01
    stride: int = 100
    h_max: float = 0.5
    coeffs: Optional[dict] = None


def run_single(run: KdvRun) -> KdvErrorTable:
    coeffs = ModelCoefficients(alpha=run.alpha, **(run.coeffs or DEFAULT_COEFFS))
    grid = experiment_grid(run.eps, run.T, run.alpha, run.h_max)
    u0, u1, v0, v1 = build_initial_data(run.eps, run.c, run.alpha, coeffs.a_uu, grid)
    log.info("kdv run eps=%g L=%g N=%d", run.eps, grid.L, grid.N)
    res = evolve(EvolutionConfig(coeffs, grid, u0, u1, v0, v1, T=run.T, dt=run.dt, monitor_stride=run.stride))
    if res.status != "completed":
        raise errors.NonFinite(f"eps={run.eps}: {res.status} ({res.message})")
    return measure_error(res.states, run.eps, run.c, run.alpha, coeffs.a_uu)


def run_experiment(eps_list: Sequence[float], jobs: int = 1, **kw) -> KdvErrorTable:
    runs = [KdvRun(eps=float(e), **kw) for e in sorted(eps_list, reverse=True)]
    if jobs > 1 and len(runs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(run_single, runs))
    else:
        parts = [run_single(r) for r in runs]
    table = KdvErrorTable()
    for p in parts:
        table.extend(p)
    return table
