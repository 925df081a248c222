"""Periodic Fourier grid and the spectral operators built on it.

Transforms use the unitary DFT (``norm="ortho"``): the round trip is the
identity and the Euclidean norm of a coefficient vector equals the
Euclidean norm of the samples.  Continuous-transform constants never
appear here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple, Union

import numpy as np

from . import errors

MEAN_TOL = 1e-10
REAL_TOL = 1e-12

Symbol = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid on [-L, L) with N nodes, x_j = -L + j h."""

    L: float
    N: int

    def __post_init__(self):
        if not np.isfinite(self.L) or self.L <= 0:
            raise errors.InvalidGrid(f"half length must be positive, got L={self.L}")
        if int(self.N) != self.N or self.N % 2 or self.N < 8:
            raise errors.OddN(f"N must be an even integer >= 8, got N={self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @cached_property
    def x(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    @cached_property
    def m(self) -> np.ndarray:
        """Integer mode indices in FFT order; index N/2 holds m = -N/2."""
        return np.fft.fftfreq(self.N, d=1.0 / self.N).astype(int)

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumbers pi*m/L in FFT order."""
        return np.pi * self.m / self.L

    @cached_property
    def k_rfft(self) -> np.ndarray:
        return np.pi * np.arange(self.N // 2 + 1) / self.L

    @property
    def nyquist(self) -> int:
        return self.N // 2

    def reflect(self, f: np.ndarray) -> np.ndarray:
        """Samples of f(-x): index j maps to (N - j) mod N."""
        return np.roll(f[::-1], 1)

    def asymmetry(self, f: np.ndarray) -> float:
        return float(np.max(np.abs(f - self.reflect(f))))

    def even_part(self, f: np.ndarray) -> np.ndarray:
        return 0.5 * (f + self.reflect(f))


def build_grid(L: float, N: int) -> PeriodicGrid:
    return PeriodicGrid(L, N)


@dataclass(frozen=True)
class RealField:
    """Real samples tied to a grid."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.N,):
            raise errors.GridMismatch(f"expected {self.grid.N} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise errors.ValidationError("field contains non-finite values")
        object.__setattr__(self, "values", vals)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def forward(f: np.ndarray) -> np.ndarray:
    return np.fft.fft(f, norm="ortho")


def inverse(F: np.ndarray) -> np.ndarray:
    return np.fft.ifft(F, norm="ortho")


def _check_field(grid: PeriodicGrid, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.N,):
        raise errors.GridMismatch(f"field has shape {f.shape}, grid has N={grid.N}")
    return f


def symbol_values(grid: PeriodicGrid, symbol: Symbol) -> np.ndarray:
    s = symbol(grid.k) if callable(symbol) else np.asarray(symbol)
    s = np.broadcast_to(np.asarray(s, dtype=complex), (grid.N,)).copy()
    # the -N/2 mode has no partner; only the real part of its multiplier
    # maps real data to real data
    s[grid.nyquist] = s[grid.nyquist].real
    return s


def apply_fourier_symbol(grid: PeriodicGrid, f, symbol: Symbol, tol: float = REAL_TOL) -> np.ndarray:
    """Inverse transform of symbol(k) * fhat(k), returned as a real array."""
    f = _check_field(grid, f)
    s = symbol_values(grid, symbol)
    # partner of index j is (N - j) mod N; the Nyquist entry is its own partner
    mismatch = np.abs(s - np.conj(s[(-np.arange(grid.N)) % grid.N]))
    bad = mismatch > tol * np.maximum(1.0, np.abs(s))
    if np.any(bad):
        raise errors.NonRealSymbol(
            f"symbol asymmetry {float(np.max(mismatch)):.3e} exceeds {tol:g}; need s(-k) = conj(s(k)) for a real result"
        )
    return inverse(s * forward(f)).real


def derivative(grid: PeriodicGrid, f, order: int = 1) -> np.ndarray:
    if int(order) != order or order < 1:
        raise errors.ValidationError(f"derivative order must be a positive integer, got {order}")
    return apply_fourier_symbol(grid, f, (1j * grid.k) ** int(order))


def antiderivative_zero_mean(grid: PeriodicGrid, f, tol: float = MEAN_TOL) -> np.ndarray:
    """Zero-mean g with g' = f; only defined for mean-zero f on a periodic domain."""
    f = _check_field(grid, f)
    mean = float(np.mean(f))
    if abs(mean) > tol:
        raise errors.NonZeroMean(f"mean {mean:.3e} exceeds tolerance {tol:g}")
    k = grid.k
    s = np.zeros(grid.N, dtype=complex)
    nz = k != 0
    s[nz] = 1.0 / (1j * k[nz])
    return apply_fourier_symbol(grid, f, s)


class Norms(NamedTuple):
    l2: float
    sup: float
    h1: float


def norms(grid: PeriodicGrid, f) -> Norms:
    f = _check_field(grid, f)
    l2sq = grid.h * float(np.sum(f * f))
    fx = derivative(grid, f, 1)
    h1sq = l2sq + grid.h * float(np.sum(fx * fx))
    return Norms(np.sqrt(l2sq), float(np.max(np.abs(f))), np.sqrt(h1sq))


def integral(grid: PeriodicGrid, f) -> float:
    return grid.h * float(np.sum(_check_field(grid, f)))


def inner(grid: PeriodicGrid, f, g) -> float:
    return grid.h * float(np.dot(_check_field(grid, f), _check_field(grid, g)))


def parseval_sum(grid: PeriodicGrid, f) -> float:
    """Spectral counterpart of h * sum f_j^2."""
    F = forward(_check_field(grid, f))
    return grid.h * float(np.sum(np.abs(F) ** 2))


def dealias_mask(grid: PeriodicGrid, fraction: float = 2.0 / 3.0, rfft: bool = False) -> np.ndarray:
    """1 on retained modes (|m| <= fraction * N/2), 0 on the truncated top band."""
    m = np.arange(grid.N // 2 + 1) if rfft else np.abs(grid.m)
    return (m <= fraction * (grid.N // 2)).astype(float)


def tail_fraction(grid: PeriodicGrid, f, fraction: float = 1.0 / 3.0) -> float:
    """Share of spectral energy carried by the top `fraction` of |m|."""
    F2 = np.abs(forward(_check_field(grid, f))) ** 2
    total = float(np.sum(F2))
    if total == 0.0:
        return 0.0
    top = np.abs(grid.m) > (1.0 - fraction) * (grid.N // 2)
    return float(np.sum(F2[top])) / total
