"""Analytic oracles: the special exact solitary wave, the KdV soliton and its
v-corrections, the improved-Boussinesq soliton, exponential Green kernels
and constant fixed points of the traveling-wave system.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from . import _core, errors
from .model import ModelCoefficients, eval_nonlinearities
from .spectral import PeriodicGrid, derivative

FP_DEDUP = 1e-9
FP_TOL = 1e-10


def sech(x):
    # 1/cosh overflows to 0 gracefully, unlike the exp form
    with np.errstate(over="ignore"):
        return 1.0 / np.cosh(x)


# ---------------------------------------------------------------- exact CSW


@dataclass(frozen=True)
class ExactCswParams:
    alpha: float
    c_s: float
    b: float
    A1: float
    A2: float

    def u(self, xi):
        return self.A1 * sech(self.b * np.asarray(xi, dtype=float)) ** 2

    def v(self, xi):
        return self.A2 * sech(self.b * np.asarray(xi, dtype=float))

    def profile(self, xi, t: float = 0.0):
        xi = np.asarray(xi, dtype=float) - self.c_s * t
        return self.u(xi), self.v(xi)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "c_s": self.c_s, "b": self.b, "A1": self.A1, "A2": self.A2}


def exact_csw_special(alpha: float, c_s: float, b_uv: float, a_vv: float) -> Tuple[ModelCoefficients, ExactCswParams]:
    """u = A1 sech^2(b xi), v = A2 sech(b xi) for a_uv = b_uu = b_vv = 0."""
    c2 = float(c_s) ** 2
    if c2 >= 1.0:
        raise errors.SuperSonic(f"c_s^2 = {c2} >= 1: b^2 = 1/(1-c_s^2) undefined")
    if b_uv == 0:
        raise errors.ZeroBuv("b_uv must be nonzero (A1 = 1/b_uv)")
    b2 = 1.0 / (1.0 - c2)
    num = c2 - alpha**2 - 4.0 * b2 * c2
    if a_vv == 0:
        raise errors.NegativeRadicand("a_vv = 0 makes the amplitude radicand undefined")
    rad = num / (a_vv * b_uv)
    if not rad > 0:
        raise errors.NegativeRadicand(f"(c_s^2 - alpha^2 - 4 b^2 c_s^2)/(a_vv b_uv) = {rad:.6g} is not positive")
    coeffs = ModelCoefficients(alpha=alpha, a_uu=6.0 * (b2 - 1.0) * b_uv, a_vv=a_vv, b_uv=b_uv)
    return coeffs, ExactCswParams(float(alpha), float(c_s), float(np.sqrt(b2)), 1.0 / b_uv, float(np.sqrt(rad)))


def exact_csw_coefficient_residuals(coeffs: ModelCoefficients, p: ExactCswParams) -> np.ndarray:
    """The four algebraic conditions obtained by inserting the sech ansatz."""
    c2, b2, a2 = p.c_s**2, p.b**2, p.alpha**2
    return np.array(
        [
            4.0 * p.A1 * b2 * c2 + (a2 - c2) * p.A1 + coeffs.a_vv * p.A2**2,
            p.A1 * coeffs.a_uu - 6.0 * b2 * c2,
            (1.0 - c2) * b2 - 1.0,
            coeffs.b_uv * p.A1 - (1.0 - c2) * b2,
        ]
    )


def traveling_wave_residual(c: ModelCoefficients, c_s: float, grid: PeriodicGrid, u, v) -> Tuple[np.ndarray, np.ndarray]:
    """Real-space residuals of the profile ODEs, derivatives taken spectrally."""
    c2 = c_s * c_s
    f1, f2 = eval_nonlinearities(c, u, v)
    r1 = (c2 - c.alpha**2) * u - c2 * derivative(grid, u, 2) - f1
    r2 = v - (1.0 - c2) * derivative(grid, v, 2) - f2
    return r1, r2


# ---------------------------------------------------------------- KdV


@dataclass(frozen=True)
class KdVAnsatz:
    eps: float
    c: float
    alpha: float
    a_uu: float

    def __post_init__(self):
        if not self.eps > 0:
            raise errors.ValidationError(f"eps must be positive, got {self.eps}")
        if not self.c > 0:
            raise errors.ValidationError(f"KdV speed c must be positive, got {self.c}")
        if not self.a_uu > 0:
            raise errors.ValidationError(f"a_uu must be positive, got {self.a_uu}")

    @property
    def amplitude(self) -> float:
        return 3.0 * self.c * self.alpha**2 / self.a_uu

    @property
    def width(self) -> float:
        return abs(self.alpha) * np.sqrt(self.c / 2.0)

    @property
    def speed(self) -> float:
        """Lab-frame speed of the soliton core, alpha (1 + c eps^2)."""
        return self.alpha * (1.0 + self.c * self.eps**2)

    def phase(self, x, t: float = 0.0, period: float = None):
        """eps (x - alpha t) - c eps^3 alpha t, optionally with x - speed t wrapped into one period."""
        y = np.asarray(x, dtype=float) - self.speed * t
        if period is not None:
            y = (y + 0.5 * period) % period - 0.5 * period
        return self.eps * y

    def profile(self, x, t: float = 0.0, period: float = None):
        return self.eps**2 * self.amplitude * sech(self.width * self.phase(x, t, period)) ** 2

    def time_derivative(self, x, t: float = 0.0, period: float = None):
        """d/dt of ``profile``: -speed * d/dx."""
        s = self.width * self.phase(x, t, period)
        dpsi_dx = -2.0 * self.eps**3 * self.amplitude * self.width * sech(s) ** 2 * np.tanh(s)
        return -self.speed * dpsi_dx


def kdv_soliton(eps: float, c: float, alpha: float, a_uu: float, x, t: float = 0.0):
    return KdVAnsatz(eps, c, alpha, a_uu).profile(x, t)


def kdv_slow_soliton(c: float, alpha: float, a_uu: float, X):
    """A~(xi) = 3a sech^2(sqrt(a/b) xi / 2), a = alpha^2 c/a_uu, b = 1/(2 a_uu)."""
    a = alpha**2 * c / a_uu
    bb = 1.0 / (2.0 * a_uu)
    return 3.0 * a * sech(0.5 * np.sqrt(a / bb) * np.asarray(X, dtype=float)) ** 2


def kdv_residual(grid: PeriodicGrid, A, alpha: float, a_uu: float, c: float) -> np.ndarray:
    """2 alpha^2 A_T + A_XXX + a_uu (A^2)_X for A(X - cT), so A_T = -c A_X."""
    A = np.asarray(A, dtype=float)
    A_X = derivative(grid, A, 1)
    return -2.0 * alpha**2 * c * A_X + derivative(grid, A, 3) + a_uu * derivative(grid, A * A, 1)


def kdv_corrections(grid: PeriodicGrid, A, c: ModelCoefficients) -> Tuple[np.ndarray, np.ndarray]:
    """B1 = b_uu A^2, B2 = (1 - alpha^2) B1_XX + 2 b_uv A B1."""
    A = np.asarray(A, dtype=float)
    B1 = c.b_uu * A * A
    B2 = (1.0 - c.alpha**2) * derivative(grid, B1, 2) + 2.0 * c.b_uv * A * B1
    return B1, B2


# ---------------------------------------------------------------- improved Boussinesq


def imbq_soliton(p: int, c_s: float, x):
    """Q_c(r) = (c^2-1)^(1/(p-1)) Q(sqrt((c^2-1)/c^2) r) for the alpha = 1 equation."""
    if int(p) != p or p < 2:
        raise errors.ValidationError(f"p must be an integer >= 2, got {p}")
    c2 = float(c_s) ** 2
    if c2 <= 1.0:
        raise errors.SubSonic(f"|c_s| = {abs(c_s)} <= 1: no super-luminal solitary wave")
    q = 1.0 / (p - 1)
    r = np.sqrt((c2 - 1.0) / c2) * np.asarray(x, dtype=float)
    Q = (0.5 * (p + 1) * sech(0.5 * (p - 1) * r) ** 2) ** q
    return (c2 - 1.0) ** q * Q


def imbq_residual(grid: PeriodicGrid, p: int, c_s: float, Q) -> np.ndarray:
    c2 = c_s * c_s
    return (c2 - 1.0) * Q - c2 * derivative(grid, Q, 2) - Q**p


# ---------------------------------------------------------------- Green kernels


@dataclass(frozen=True)
class KernelPair:
    """Inverse kernels of p1 = c^2 s^2 + c^2 k^2 and p2 = (1-c^2)(r^2 + k^2)."""

    coeffs: ModelCoefficients
    c_s: float
    s: float
    r: float

    @property
    def u_scale(self) -> float:
        return 1.0 / (2.0 * self.s * self.c_s**2)

    @property
    def v_scale(self) -> float:
        return 1.0 / (2.0 * self.r * (1.0 - self.c_s**2))

    def k_base(self, x):
        return self.u_scale * np.exp(-self.s * np.abs(np.asarray(x, dtype=float)))

    def m_base(self, x):
        return self.v_scale * np.exp(-self.r * np.abs(np.asarray(x, dtype=float)))

    def k(self, pair: str, x):
        return getattr(self.coeffs, "a_" + pair) * self.k_base(x)

    def m(self, pair: str, x):
        return getattr(self.coeffs, "b_" + pair) * self.m_base(x)

    def p1(self, k):
        return self.c_s**2 - self.coeffs.alpha**2 + self.c_s**2 * np.asarray(k, dtype=float) ** 2

    def p2(self, k):
        return 1.0 + (1.0 - self.c_s**2) * np.asarray(k, dtype=float) ** 2

    def k_symbol(self, k):
        """Fourier transform of k_base, int e^{-ikx} k_base(x) dx."""
        k = np.asarray(k, dtype=float)
        return self.u_scale * 2.0 * self.s / (self.s**2 + k * k)

    def m_symbol(self, k):
        k = np.asarray(k, dtype=float)
        return self.v_scale * 2.0 * self.r / (self.r**2 + k * k)


def green_kernels(c: ModelCoefficients, c_s: float) -> KernelPair:
    c2 = float(c_s) ** 2
    if not (c.alpha**2 < c2 < 1.0):
        raise errors.OutOfRegime(f"need alpha^2 < c_s^2 < 1, got alpha^2={c.alpha**2}, c_s^2={c2}")
    mu = 1.0 - c.alpha**2 / c2
    return KernelPair(c, float(c_s), float(np.sqrt(mu)), float(1.0 / np.sqrt(1.0 - c2)))


def convolve_exponential(grid: PeriodicGrid, g, s: float, corrected: bool = True) -> np.ndarray:
    """int e^{-s|x-y|} g(y) dy at the nodes, for g negligible near the domain ends.

    The trapezoid sum is exact away from the cusp at y = x; the kink is
    handled by Euler-Maclaurin end corrections through h^6.
    """
    g = np.ascontiguousarray(g, dtype=float)
    h = grid.h
    out = h * _core.exp_filter_sum(g, float(np.exp(-s * h)))
    if corrected:
        g2 = derivative(grid, g, 2)
        g4 = derivative(grid, g, 4)
        d1 = 2.0 * s * g
        d3 = 2.0 * (3.0 * s * g2 + s**3 * g)
        d5 = 2.0 * (5.0 * s * g4 + 10.0 * s**3 * g2 + s**5 * g)
        out = out - h**2 / 12.0 * d1 + h**4 / 720.0 * d3 - h**6 / 30240.0 * d5
    return out


def fixed_point_map(kp: KernelPair, grid: PeriodicGrid, u, v) -> Tuple[np.ndarray, np.ndarray]:
    """The convolution form: (k_uu*u^2 + 2k_uv*uv + k_vv*v^2, same with m)."""
    f1, f2 = eval_nonlinearities(kp.coeffs, u, v)
    Au = kp.u_scale * convolve_exponential(grid, f1, kp.s)
    Av = kp.v_scale * convolve_exponential(grid, f2, kp.r)
    return Au, Av


# ---------------------------------------------------------------- constant fixed points


@dataclass(frozen=True)
class ConstantFixedPoint:
    X: float
    Y: float
    residual: float  # constant-solution form of the profile ODEs
    residual_halved: float  # the variant with (c^2 - alpha^2)/2 and 1/2


def _const_residual(c: ModelCoefficients, d: float, X: float, Y: float, half: bool = False) -> np.ndarray:
    q = 0.5 if half else 1.0
    f1 = c.a_uu * X * X + 2.0 * c.a_uv * X * Y + c.a_vv * Y * Y
    f2 = c.b_uu * X * X + 2.0 * c.b_uv * X * Y + c.b_vv * Y * Y
    return np.array([f1 - q * d * X, f2 - q * Y])


def _newton_polish(c: ModelCoefficients, d: float, X: float, Y: float, iters: int = 8):
    z = np.array([X, Y], dtype=float)
    for _ in range(iters):
        F = _const_residual(c, d, *z)
        x, y = z
        J = np.array(
            [
                [2 * c.a_uu * x + 2 * c.a_uv * y - d, 2 * c.a_uv * x + 2 * c.a_vv * y],
                [2 * c.b_uu * x + 2 * c.b_uv * y, 2 * c.b_uv * x + 2 * c.b_vv * y - 1.0],
            ]
        )
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        z = z - step
        if np.max(np.abs(step)) <= 1e-16 * max(1.0, np.max(np.abs(z))):
            break
    return float(z[0]), float(z[1])


def constant_fixed_points(c: ModelCoefficients, c_s: float) -> List[ConstantFixedPoint]:
    """Constant solutions of (c^2 - alpha^2) X = f1(X, Y), Y = f2(X, Y).

    X = 0 is handled directly; otherwise Y = tX and t solves the cubic
    a_vv t^3 + (2a_uv - d b_vv) t^2 + (a_uu - 2d b_uv) t - d b_uu = 0.
    """
    d = float(c_s) ** 2 - c.alpha**2
    cands = [(0.0, 0.0)]
    if c.a_vv == 0.0 and c.b_vv != 0.0:
        cands.append((0.0, 1.0 / c.b_vv))
    poly = np.array([c.a_vv, 2 * c.a_uv - d * c.b_vv, c.a_uu - 2 * d * c.b_uv, -d * c.b_uu])
    nz = np.flatnonzero(np.abs(poly) > 0)
    if nz.size:
        roots = np.roots(poly[nz[0]:]) if nz[0] < 3 else np.array([])
        for t in roots:
            if abs(t.imag) > 1e-9 * max(1.0, abs(t)):
                continue
            t = float(t.real)
            q1 = c.a_uu + 2 * c.a_uv * t + c.a_vv * t * t
            q2 = c.b_uu + 2 * c.b_uv * t + c.b_vv * t * t
            if abs(q1) > 1e-14 and d != 0.0:
                X = d / q1
            elif abs(q2) > 1e-14 and t != 0.0:
                X = t / q2
            else:
                continue
            cands.append((X, t * X))
    out: List[ConstantFixedPoint] = []
    for X, Y in cands:
        X, Y = _newton_polish(c, d, X, Y)
        res = float(np.max(np.abs(_const_residual(c, d, X, Y))))
        if not np.isfinite(res) or res > FP_TOL * max(1.0, abs(X), abs(Y)) ** 2:
            continue
        if any(abs(X - p.X) <= FP_DEDUP and abs(Y - p.Y) <= FP_DEDUP for p in out):
            continue
        half = float(np.max(np.abs(_const_residual(c, d, X, Y, half=True))))
        out.append(ConstantFixedPoint(X, Y, res, half))
    return sorted(out, key=lambda p: (p.X, p.Y))
