"""Petviashvili iteration for traveling-wave profiles.

The profile system, in Fourier space, is diagonal:

    p1(k) u^ = f1^,  p1 = c^2 - alpha^2 + c^2 k^2
    p2(k) v^ = f2^,  p2 = 1 + (1 - c^2) k^2

and the iteration map is (u, v) -> M^2 (f1^/p1, f2^/p2) with the
stabilizing factor M = Re<S z^, z^> / Re<F^, z^>.  All transforms are
unitary, so spectral and sample Euclidean norms coincide.

Two accelerators sit on top of the plain map: minimal polynomial
extrapolation over a sliding window, and a Jacobian-free Newton-GMRES
solve of z = T(z) (counted in map evaluations like every other mode).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from . import errors
from .closed_form import sech, traveling_wave_residual
from .model import ModelCoefficients, eval_nonlinearities
from .regimes import RegionReport, classify
from .spectral import PeriodicGrid, forward, inverse, tail_fraction

log = logging.getLogger(__name__)

SINGULAR_DELTA = 1e-10
STABILIZER_EPS = 1e-14
TAIL_WARN = 1e-8
STAGNATION_WINDOW = 20
STAGNATION_REL = 1e-3
DIVERGENCE_FACTOR = 1e6
ACCELERATORS = ("none", "mpe", "newton")


@dataclass(frozen=True)
class SymbolMatrix:
    grid: PeriodicGrid
    c_s: float
    p1: np.ndarray
    p2: np.ndarray

    def apply(self, U, V):
        return self.p1 * U, self.p2 * V


def assemble_symbols(c: ModelCoefficients, c_s: float, grid: PeriodicGrid, delta: float = SINGULAR_DELTA) -> SymbolMatrix:
    c2 = float(c_s) ** 2
    k = grid.k
    p1 = c2 - c.alpha**2 + c2 * k * k
    p2 = 1.0 + (1.0 - c2) * k * k
    for name, p in (("p1", p1), ("p2", p2)):
        j = int(np.argmin(np.abs(p)))
        if abs(p[j]) <= delta:
            raise errors.SingularSymbolAt(k[j], name, p[j])
    return SymbolMatrix(grid, float(c_s), p1, p2)


# ---------------------------------------------------------------- guesses


def initial_guess(kind: str, c: ModelCoefficients, c_s: float, grid: PeriodicGrid, custom=None):
    """CswNormalForm: u0 = A_u sech^2(sqrt(mu) x/2), A_u = 3(c^2-alpha^2)/(2 a_uu), v0 = b_uu u0^2."""
    if kind == "Custom":
        if custom is None:
            raise errors.ValidationError("Custom guess needs (u, v) arrays")
        u, v = (np.asarray(f, dtype=float).copy() for f in custom)
        if u.shape != (grid.N,) or v.shape != (grid.N,):
            raise errors.GridMismatch("custom guess does not match the grid")
        return u, v
    if kind != "CswNormalForm":
        raise errors.ValidationError(f"unknown guess kind {kind!r}")
    if c.a_uu == 0.0:
        raise errors.ZeroAuu("normal-form guess needs a_uu != 0")
    c2 = float(c_s) ** 2
    mu = 1.0 - c.alpha**2 / c2
    if not mu > 0:
        raise errors.NonPositiveMu(f"mu = {mu:.6g} <= 0")
    amp = 3.0 * (c2 - c.alpha**2) / (2.0 * c.a_uu)
    u = amp * sech(0.5 * np.sqrt(mu) * grid.x) ** 2
    return u, c.b_uu * u * u


def normal_form_parameters(c: ModelCoefficients, c_s: float) -> Tuple[float, float]:
    c2 = float(c_s) ** 2
    return 3.0 * (c2 - c.alpha**2) / (2.0 * c.a_uu), 0.5 * np.sqrt(1.0 - c.alpha**2 / c2)


# ---------------------------------------------------------------- one step


@dataclass(frozen=True)
class StepResult:
    u: np.ndarray
    v: np.ndarray
    M: float
    RES: float


def _spectral_parts(u, v, sym: SymbolMatrix, c: ModelCoefficients):
    U, V = forward(u), forward(v)
    f1, f2 = eval_nonlinearities(c, u, v)
    return U, V, forward(f1), forward(f2)


def _res(U, V, F1, F2, sym) -> float:
    return float(np.sqrt(np.sum(np.abs(sym.p1 * U - F1) ** 2) + np.sum(np.abs(sym.p2 * V - F2) ** 2)))


def residual(u, v, sym: SymbolMatrix, c: ModelCoefficients) -> float:
    """Euclidean norm of S(k)(u^, v^) - (f1^, f2^) over all 2N coefficients."""
    return _res(*_spectral_parts(u, v, sym, c), sym)


def stabilizing_factor(U, V, F1, F2, sym) -> float:
    num = float(np.real(np.vdot(U, sym.p1 * U) + np.vdot(V, sym.p2 * V)))
    den = float(np.real(np.vdot(U, F1) + np.vdot(V, F2)))
    if abs(den) <= STABILIZER_EPS:
        raise errors.DegenerateStabilizer(f"Re<F^, z^> = {den:.3e}")
    return num / den


def petviashvili_step(u, v, sym: SymbolMatrix, c: ModelCoefficients, symmetric: bool = False) -> StepResult:
    U, V, F1, F2 = _spectral_parts(u, v, sym, c)
    res = _res(U, V, F1, F2, sym)
    M = stabilizing_factor(U, V, F1, F2, sym)
    un = inverse(M * M * F1 / sym.p1).real
    vn = inverse(M * M * F2 / sym.p2).real
    if symmetric:
        un, vn = sym.grid.even_part(un), sym.grid.even_part(vn)
    return StepResult(un, vn, M, res)


# ---------------------------------------------------------------- extrapolation


def extrapolate_cycle(iterates: Sequence[np.ndarray], rcond: float = 1e-13) -> np.ndarray:
    """Minimal polynomial extrapolation from x_0..x_{K-1} (K >= 3).

    With u_j = x_{j+1} - x_j, solve sum_{j<K-2} c_j u_j = -u_{K-2}, set
    c_{K-2} = 1, gamma = c / sum(c), and return sum_j gamma_j x_{j+1}.
    """
    X = np.array([np.atleast_1d(np.asarray(x, dtype=float)).ravel() for x in iterates])
    K = X.shape[0]
    if K < 3:
        raise errors.ValidationError(f"extrapolation needs at least 3 iterates, got {K}")
    D = np.diff(X, axis=0).T  # columns u_0..u_{K-2}
    scale = float(np.max(np.abs(X)))
    if float(np.max(np.abs(D))) <= 1e-15 * max(scale, 1e-300):
        return X[-1].copy()
    coef, _, rank, _ = np.linalg.lstsq(D[:, :-1], -D[:, -1], rcond=rcond)
    if rank < min(D.shape[0], K - 2):
        raise errors.RankDeficient(f"difference matrix has rank {rank} < {min(D.shape[0], K - 2)}")
    cvec = np.append(coef, 1.0)
    tot = cvec.sum()
    if abs(tot) <= 1e-14 * np.max(np.abs(cvec)):
        raise errors.RankDeficient("sum of extrapolation coefficients vanishes")
    gamma = cvec / tot
    return gamma @ X[1:]


# ---------------------------------------------------------------- solver


@dataclass
class ConvergenceTrace:
    n: List[int] = field(default_factory=list)  # map evaluations so far
    M: List[float] = field(default_factory=list)
    RES: List[float] = field(default_factory=list)
    change: List[float] = field(default_factory=list)

    def append(self, n, M, res, change):
        self.n.append(int(n))
        self.M.append(float(M))
        self.RES.append(float(res))
        self.change.append(float(change))

    def __len__(self):
        return len(self.RES)


@dataclass(frozen=True)
class RippleDiagnostic:
    amplitude: float  # sup |v| over |x| >= 3L/4
    window_sups: Tuple[float, float, float, float]
    variation: float  # (max - min)/max over the four sub-windows


def ripple_diagnostic(grid: PeriodicGrid, v) -> RippleDiagnostic:
    v = np.abs(np.asarray(v, dtype=float))
    x, L = grid.x, grid.L
    left = v[x <= -0.75 * L]
    right = v[x >= 0.75 * L]
    parts = np.array_split(left, 2) + np.array_split(right, 2)
    sups = tuple(float(np.max(p)) for p in parts)
    hi = max(sups)
    var = (hi - min(sups)) / hi if hi > 0 else 0.0
    return RippleDiagnostic(hi, sups, float(var))


@dataclass
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 500
    accel: str = "none"
    window: int = 5
    symmetric: bool = True
    guess: str = "CswNormalForm"
    newton_rtol: float = 1e-3
    newton_restart: int = 30

    def __post_init__(self):
        if self.accel not in ACCELERATORS:
            raise errors.ValidationError(f"accel must be one of {ACCELERATORS}, got {self.accel!r}")
        if self.window < 3:
            raise errors.ValidationError("extrapolation window must be >= 3")
        if not self.tol > 0 or self.max_iter < 1:
            raise errors.ValidationError("tol must be positive and max_iter >= 1")


@dataclass
class WaveProfile:
    grid: PeriodicGrid
    c_s: float
    u: np.ndarray
    v: np.ndarray
    status: str  # converged, stagnated, max_iter
    trace: ConvergenceTrace
    evaluations: int
    residual: float
    realspace_residual: float
    ripple: RippleDiagnostic
    classified: Optional[RegionReport]
    warnings: List[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


class _Solver:
    def __init__(self, c, sym, opts):
        self.c, self.sym, self.opts = c, sym, opts
        self.N = sym.grid.N
        self.evals = 0
        self.trace = ConvergenceTrace()
        self.best = np.inf

    def T(self, z):
        """Iteration map on the stacked vector (u, v); returns (T(z), M, RES(z))."""
        self.evals += 1
        st = petviashvili_step(z[: self.N], z[self.N :], self.sym, self.c, self.opts.symmetric)
        return np.concatenate([st.u, st.v]), st.M, st.RES

    def log_point(self, M, res, change):
        self.trace.append(self.evals, M, res, change)
        if not np.isfinite(res):
            raise errors.Diverged(f"residual became non-finite after {self.evals} evaluations")
        self.best = min(self.best, res)
        if res > DIVERGENCE_FACTOR * self.best:
            raise errors.Diverged(f"RES = {res:.3e} exceeds {DIVERGENCE_FACTOR:g} x its minimum {self.best:.3e}")

    def stagnated(self) -> bool:
        r = self.trace.RES
        w = STAGNATION_WINDOW
        if len(r) <= w:
            return False
        return abs(r[-1] - r[-1 - w]) < STAGNATION_REL * r[-1 - w]

    def run_plain(self, z, extrapolate: bool):
        o = self.opts
        buf = [z]
        while True:
            Tz, M, res = self.T(z)
            self.log_point(M, res, np.max(np.abs(Tz - z)))
            if res < o.tol:
                return z, "converged"
            if self.evals >= o.max_iter:
                return z, "max_iter"
            if self.stagnated():
                return z, "stagnated"
            z = Tz
            if extrapolate:
                buf.append(z)
                if len(buf) == o.window:
                    try:
                        z = extrapolate_cycle(buf)
                    except errors.RankDeficient as exc:
                        log.debug("extrapolation skipped: %s", exc)
                    buf = [z]

    def run_newton(self, z):
        o = self.opts
        n2 = 2 * self.N
        while True:
            Tz, M, res = self.T(z)
            r = Tz - z
            self.log_point(M, res, np.max(np.abs(r)))
            if res < o.tol:
                return z, "converged"
            if self.evals >= o.max_iter:
                return z, "max_iter"
            if self.stagnated():
                return z, "stagnated"
            nz = max(1.0, float(np.linalg.norm(z)))

            def matvec(d, z=z, Tz=Tz, nz=nz):
                nd = float(np.linalg.norm(d))
                if nd == 0.0:
                    return np.zeros_like(d)
                h = 1e-7 * nz / nd
                return d - (self.T(z + h * d)[0] - Tz) / h

            A = LinearOperator((n2, n2), matvec=matvec, dtype=float)
            d, _info = gmres(A, r, rtol=o.newton_rtol, restart=o.newton_restart, maxiter=1)
            z = z + d


def solve_wave(
    c: ModelCoefficients,
    c_s: float,
    grid: PeriodicGrid,
    options: Optional[SolverOptions] = None,
    guess=None,
    **kw,
) -> WaveProfile:
    """Iterate the Petviashvili map from a guess until RES < tol.

    ``guess`` is None (normal-form guess) or a (u, v) pair.  Extra keyword
    arguments update the options; ``extrapolate=True`` selects MPE.
    """
    if options is None:
        options = SolverOptions()
    if kw:
        if "extrapolate" in kw:
            ex = kw.pop("extrapolate")
            if ex is True:
                kw.setdefault("accel", "mpe")
            elif ex:
                kw.setdefault("accel", ex)
        options = SolverOptions(**{**options.__dict__, **kw})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = classify(c, c_s)
    sym = assemble_symbols(c, c_s, grid)
    if guess is None:
        u, v = initial_guess(options.guess, c, c_s, grid)
    else:
        u, v = initial_guess("Custom", c, c_s, grid, custom=guess)
    if options.symmetric:
        u, v = grid.even_part(u), grid.even_part(v)
    z0 = np.concatenate([u, v])
    s = _Solver(c, sym, options)
    if options.accel == "newton":
        z, status = s.run_newton(z0)
    else:
        z, status = s.run_plain(z0, options.accel == "mpe")
    u, v = z[: grid.N].copy(), z[grid.N :].copy()
    res = residual(u, v, sym, c)
    r1, r2 = traveling_wave_residual(c, c_s, grid, u, v)
    notes = []
    tf = max(tail_fraction(grid, u), tail_fraction(grid, v))
    if tf > TAIL_WARN:
        msg = f"top-third spectral energy fraction {tf:.2e} exceeds {TAIL_WARN:g}; increase N"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return WaveProfile(
        grid=grid,
        c_s=float(c_s),
        u=u,
        v=v,
        status=status,
        trace=s.trace,
        evaluations=s.evals,
        residual=res,
        realspace_residual=float(np.sqrt(np.sum(r1 * r1) + np.sum(r2 * r2))),
        ripple=ripple_diagnostic(grid, v),
        classified=report,
        warnings=notes,
    )

