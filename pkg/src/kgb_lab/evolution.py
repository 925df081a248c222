"""Method-of-lines integration of the first-order KGB system

    u_t = w_x,  (1 - d_xx) w_t = (alpha^2 u + f1)_x,  v_t = z,  z_t = v_xx - v + f2,

with classical RK4 in real-FFT space, plus the exact linear propagator and
the invariant / blow-up monitors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import errors
from .model import (
    InvariantSnapshot,
    ModelCoefficients,
    eval_nonlinearities,
    energy,
    momentum,
    try_hamiltonian,
)
from .spectral import PeriodicGrid, antiderivative_zero_mean, dealias_mask, derivative, inner

log = logging.getLogger(__name__)

BLOWUP_AMPLITUDE = 1e8


@dataclass(frozen=True)
class EvolutionState:
    grid: PeriodicGrid
    u: np.ndarray
    w: np.ndarray
    v: np.ndarray
    z: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("u", "w", "v", "z"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.grid.N,):
                raise errors.GridMismatch(f"{name} has shape {arr.shape}, grid has N={self.grid.N}")
            object.__setattr__(self, name, arr)

    @property
    def fields(self):
        return self.u, self.w, self.v, self.z

    def sup(self) -> float:
        return max(float(np.max(np.abs(f))) for f in self.fields)

    def finite(self) -> bool:
        return all(np.all(np.isfinite(f)) for f in self.fields)


def zero_state(grid: PeriodicGrid) -> EvolutionState:
    zero = np.zeros(grid.N)
    return EvolutionState(grid, zero, zero, zero, zero, 0.0)


def to_first_order(grid: PeriodicGrid, u0, u1, v0, v1, t: float = 0.0) -> EvolutionState:
    """(u, w, v, z) = (u0, zero-mean antiderivative of u1, v0, v1)."""
    w0 = antiderivative_zero_mean(grid, u1)
    return EvolutionState(grid, u0, w0, v0, v1, t)


class _Spectral:
    """rfft-space operators for one grid, built once per run."""

    def __init__(self, grid: PeriodicGrid, dealias: bool = True):
        self.grid = grid
        self.N = grid.N
        k = grid.k_rfft
        self.k = k
        self.ik = 1j * k
        self.ik[-1] = 0.0  # odd derivative at Nyquist
        self.w_sym = self.ik / (1.0 + k * k)
        self.kg = -(1.0 + k * k)
        self.mask = dealias_mask(grid, rfft=True) if dealias else np.ones(k.size)

    def fwd(self, f):
        return np.fft.rfft(f)

    def inv(self, F):
        return np.fft.irfft(F, self.N)


def _rhs_hat(sp: _Spectral, c: ModelCoefficients, U, W, V, Z):
    u = sp.inv(U)
    v = sp.inv(V)
    f1, f2 = eval_nonlinearities(c, u, v)
    F1 = sp.fwd(f1) * sp.mask
    F2 = sp.fwd(f2) * sp.mask
    return sp.ik * W, sp.w_sym * (c.alpha**2 * U + F1), Z, sp.kg * V + F2


def rhs(state: EvolutionState, c: ModelCoefficients, dealias: bool = True):
    """Time derivatives (u_t, w_t, v_t, z_t) as real arrays."""
    sp = _Spectral(state.grid, dealias)
    hats = [sp.fwd(f) for f in state.fields]
    return tuple(sp.inv(d) for d in _rhs_hat(sp, c, *hats))


def _rk4_hat(sp, c, S, dt):
    k1 = _rhs_hat(sp, c, *S)
    k2 = _rhs_hat(sp, c, *[s + 0.5 * dt * q for s, q in zip(S, k1)])
    k3 = _rhs_hat(sp, c, *[s + 0.5 * dt * q for s, q in zip(S, k2)])
    k4 = _rhs_hat(sp, c, *[s + dt * q for s, q in zip(S, k3)])
    return tuple(s + dt / 6.0 * (a + 2 * b + 2 * cc + d) for s, a, b, cc, d in zip(S, k1, k2, k3, k4))


def step_rk4(state: EvolutionState, c: ModelCoefficients, dt: float, dealias: bool = True) -> EvolutionState:
    if not dt > 0:
        raise errors.ValidationError(f"dt must be positive, got {dt}")
    sp = _Spectral(state.grid, dealias)
    # overflow is reported as NonFinite below, not as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        S = _rk4_hat(sp, c, tuple(sp.fwd(f) for f in state.fields), dt)
        out = [sp.inv(q) for q in S]
    if not all(np.all(np.isfinite(f)) for f in out):
        raise errors.NonFinite(f"non-finite values after step to t={state.t + dt:.6g}")
    return EvolutionState(state.grid, *out, state.t + dt)


def linear_propagate(grid: PeriodicGrid, alpha: float, u0, u1, v0, v1, t: float):
    """Exact solution of the linear system: returns (u, u_t, v, v_t) at time t."""
    k = grid.k
    U0, U1 = np.fft.fft(u0), np.fft.fft(u1)
    V0, V1 = np.fft.fft(v0), np.fft.fft(v1)
    om = np.abs(alpha * k) / np.sqrt(1.0 + k * k)
    nz = om > 0
    cu, su = np.cos(om * t), np.sin(om * t)
    # sin(om t)/om, with the t limit on the zero mode
    sinc_u = np.full(grid.N, float(t))
    sinc_u[nz] = su[nz] / om[nz]
    U = cu * U0 + sinc_u * U1
    Ut = -om * su * U0 + cu * U1
    ov = np.sqrt(1.0 + k * k)
    cv, sv = np.cos(ov * t), np.sin(ov * t)
    V = cv * V0 + sv / ov * V1
    Vt = -ov * sv * V0 + cv * V1
    return tuple(np.fft.ifft(F).real for F in (U, Ut, V, Vt))


def default_dt(grid: PeriodicGrid, alpha: float) -> float:
    return min(0.5 * grid.h / max(abs(alpha), 1.0), 1e-2)


@dataclass
class BlowupMonitor:
    """I(t) = |d^-1 u|^2 + |u|^2 + |v|^2 + beta (t + t0)^2 and I1 = I^(-1/4)."""

    beta: float = 0.0
    t0: float = 0.0
    t: List[float] = field(default_factory=list)
    I: List[float] = field(default_factory=list)
    I1: List[float] = field(default_factory=list)
    dI: List[float] = field(default_factory=list)

    def __post_init__(self):
        if self.beta < 0 or self.t0 < 0:
            raise errors.ValidationError("beta and t0 must be nonnegative")

    def value(self, state: EvolutionState) -> float:
        g = state.grid
        um = state.u - state.u.mean()
        a = antiderivative_zero_mean(g, um)
        return inner(g, a, a) + inner(g, state.u, state.u) + inner(g, state.v, state.v) + self.beta * (state.t + self.t0) ** 2

    def derivative(self, state: EvolutionState) -> float:
        """I'(t), from u_t = w_x and d^-1 u_t = w."""
        g = state.grid
        um = state.u - state.u.mean()
        a = antiderivative_zero_mean(g, um)
        return 2.0 * (inner(g, a, state.w) + inner(g, state.u, derivative(g, state.w, 1)) + inner(g, state.v, state.z)) + 2.0 * self.beta * (state.t + self.t0)

    def record(self, state: EvolutionState):
        I = self.value(state)
        self.t.append(state.t)
        self.I.append(I)
        self.I1.append(I**-0.25 if I > 0 else float("nan"))
        self.dI.append(self.derivative(state))

    def finite_arrays(self):
        t, I = np.asarray(self.t), np.asarray(self.I)
        ok = np.isfinite(I)
        return t[ok], I[ok], np.asarray(self.I1)[ok]

    def second_differences(self) -> np.ndarray:
        _, _, I1 = self.finite_arrays()
        return np.diff(I1, 2)


@dataclass
class EvolutionConfig:
    coeffs: ModelCoefficients
    grid: PeriodicGrid
    u0: np.ndarray
    u1: np.ndarray
    v0: np.ndarray
    v1: np.ndarray
    T: float
    dt: Optional[float] = None
    monitor_stride: int = 10
    beta: float = 0.0
    t0: float = 0.0
    dealias: bool = True
    keep_states: bool = True
    blowup_amplitude: float = BLOWUP_AMPLITUDE


@dataclass
class EvolutionResult:
    status: str  # "completed" or "BlowupSuspected"
    states: List[EvolutionState]
    invariants: List[InvariantSnapshot]
    monitor: BlowupMonitor
    final: EvolutionState
    dt: float
    steps: int
    hamiltonian: bool
    boundary_contamination: float
    message: str = ""


def boundary_contamination(state: EvolutionState, fraction: float = 0.1) -> float:
    """sup of |u|, |v| on the outer `fraction` of the domain."""
    x, L = state.grid.x, state.grid.L
    outer = np.abs(x) >= (1.0 - fraction) * L
    return float(max(np.max(np.abs(state.u[outer])), np.max(np.abs(state.v[outer]))))


def evolve(cfg: EvolutionConfig) -> EvolutionResult:
    c, grid = cfg.coeffs, cfg.grid
    state = to_first_order(grid, cfg.u0, cfg.u1, cfg.v0, cfg.v1)
    dt = default_dt(grid, c.alpha) if cfg.dt is None else float(cfg.dt)
    if not dt > 0 or not cfg.T >= 0:
        raise errors.ValidationError(f"need dt > 0 and T >= 0, got dt={dt}, T={cfg.T}")
    if cfg.monitor_stride < 1:
        raise errors.ValidationError("monitor_stride must be >= 1")
    nsteps = int(round(cfg.T / dt))
    if abs(nsteps * dt - cfg.T) > 1e-9 * max(1.0, cfg.T):
        raise errors.ValidationError(f"T={cfg.T} is not a multiple of dt={dt}")
    H = try_hamiltonian(c)
    monitor = BlowupMonitor(cfg.beta, cfg.t0)
    sp = _Spectral(grid, cfg.dealias)
    S = tuple(sp.fwd(f) for f in state.fields)
    states, inv = [], []
    status, message = "completed", ""

    def snapshot(st):
        if cfg.keep_states:
            states.append(st)
        if H is not None:
            inv.append(InvariantSnapshot(st.t, energy(c, H, st), momentum(st)))
        monitor.record(st)

    snapshot(state)
    n = 0
    for n in range(1, nsteps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            S = _rk4_hat(sp, c, S, dt)
            fields = [sp.inv(q) for q in S]
        t = n * dt
        amp = max(float(np.max(np.abs(f))) for f in fields)
        if not np.isfinite(amp) or amp > cfg.blowup_amplitude:
            status = "BlowupSuspected"
            message = f"sup|fields| = {amp:.3e} at t = {t:.6g}"
            log.info("blow-up suspected: %s", message)
            break
        if n % cfg.monitor_stride == 0 or n == nsteps:
            state = EvolutionState(grid, *fields, t)
            snapshot(state)
    if status == "BlowupSuspected":
        final = state
    else:
        final = state if state.t == nsteps * dt else EvolutionState(grid, *[sp.inv(q) for q in S], nsteps * dt)
    return EvolutionResult(
        status=status,
        states=states,
        invariants=inv,
        monitor=monitor,
        final=final,
        dt=dt,
        steps=n,
        hamiltonian=H is not None,
        boundary_contamination=boundary_contamination(final),
        message=message,
    )


def relative_drift(values) -> float:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.max(np.abs(v - v[0])) / max(1.0, abs(v[0])))


def periodic_shift(grid: PeriodicGrid, f, shift: float) -> np.ndarray:
    """f(x - shift) on the periodic grid, by a spectral phase factor."""
    phase = np.exp(-1j * grid.k * shift)
    phase[grid.nyquist] = np.cos(grid.k[grid.nyquist] * shift)
    return np.fft.ifft(np.fft.fft(f) * phase).real
