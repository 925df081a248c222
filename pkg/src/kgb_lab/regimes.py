"""Linearization of the traveling-wave system at the origin.

With mu = 1 - alpha^2/c_s^2 the characteristic equation is
lambda^4 - B lambda^2 + A = 0, A = mu/(1-c_s^2), B = mu + 1/(1-c_s^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import errors
from .model import ModelCoefficients

CURVE_TOL = 1e-9
SPEED_TOL = 1e-12
ROOT_TOL = 1e-9
C20_TOL = 1e-12
ASYMPTOTIC_MU = 0.5

LABELS = ("C0", "C1", "Region1", "Region2", "Region3L", "Region3R", "Region4", "Singular")


def _check_speed(c_s: float) -> float:
    c_s = float(c_s)
    if c_s == 0.0:
        raise errors.Degenerate("c_s = 0 is not a traveling wave")
    if abs(c_s * c_s - 1.0) <= SPEED_TOL:
        raise errors.SpeedSingular(f"c_s^2 = {c_s * c_s!r} is 1 within {SPEED_TOL:g}; A and B are singular")
    return c_s


def linearization_params(c: ModelCoefficients, c_s: float) -> Tuple[float, float, float]:
    c_s = _check_speed(c_s)
    c2 = c_s * c_s
    mu = 1.0 - c.alpha**2 / c2
    A = mu / (1.0 - c2)
    B = mu + 1.0 / (1.0 - c2)
    return mu, A, B


def quartic_roots(A: float, B: float) -> np.ndarray:
    """Roots of lambda^4 - B lambda^2 + A via the quadratic in lambda^2."""
    disc = complex(B * B - 4.0 * A)
    sq = np.sqrt(disc)
    # larger-magnitude root first, the other from z1 z2 = A (no cancellation)
    z1 = (B + sq) / 2.0 if B >= 0 else (B - sq) / 2.0
    z2 = A / z1 if z1 != 0 else 0.0
    r1, r2 = np.sqrt(complex(z1)), np.sqrt(complex(z2))
    return np.array([r1, -r1, r2, -r2], dtype=complex)


def quartic_residual(roots, A: float, B: float) -> float:
    lam = np.asarray(roots, dtype=complex)
    return float(np.max(np.abs(lam**4 - B * lam**2 + A)))


def z_pm(alpha: float) -> Tuple[float, float]:
    """Roots of z^2 - (2+alpha^2) z + alpha^2."""
    a2 = float(alpha) ** 2
    s = np.sqrt(a2 * a2 + 4.0)
    zp = 0.5 * ((2.0 + a2) + s)
    # z- via the product z- z+ = alpha^2 (stable for small alpha)
    return a2 / zp, zp


@dataclass(frozen=True)
class RegionReport:
    alpha: float
    c_s: float
    mu: float
    A: float
    B: float
    roots: np.ndarray
    label: str
    z_minus: float
    z_plus: float
    predicted: Optional[str]
    c20: float
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "c_s": self.c_s,
            "mu": self.mu,
            "A": self.A,
            "B": self.B,
            "roots": [[float(r.real), float(r.imag)] for r in self.roots],
            "label": self.label,
            "z_minus": self.z_minus,
            "z_plus": self.z_plus,
            "predicted": self.predicted,
            "c20": self.c20,
            "notes": list(self.notes),
        }


def _region_label(alpha: float, c_s: float, mu: float) -> str:
    a2, c2 = alpha * alpha, c_s * c_s
    if abs(mu) <= CURVE_TOL:
        return "C0" if c2 < 1.0 else "C1"
    if a2 < c2 < 1.0:
        return "Region2"
    if 1.0 < c2 < a2:
        return "Region4"
    zm, zp = z_pm(alpha)
    lo = min(1.0, a2)
    if mu > 0:
        # c_s^2 > max(1, alpha^2)
        return "Region3R" if c2 > zp else "Region3L"
    # mu < 0: c_s^2 < min(1, alpha^2)
    return "Region3R" if zm < c2 < lo else "Region3L"


def _predict(label: str, mu: float, c20: float, notes: list) -> Optional[str]:
    if label == "Region2":
        return "CSW"
    if label == "Region4":
        return "Periodic"
    if label.startswith("Region3"):
        if mu < 0:
            return "Periodic"
        if abs(c20) < C20_TOL:
            msg = f"|c20| = {abs(c20):.3e} < {C20_TOL:g}: GSW prediction withheld"
            notes.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=3)
            return None
        return "GSW"
    return None


def classify(c: ModelCoefficients, c_s: float) -> RegionReport:
    mu, A, B = linearization_params(c, c_s)
    roots = quartic_roots(A, B)
    label = _region_label(c.alpha, float(c_s), mu)
    c20 = -c.a_uu / (c_s * c_s)
    notes: list = []
    predicted = _predict(label, mu, c20, notes)
    if abs(mu) > ASYMPTOTIC_MU:
        notes.append("outside asymptotic regime (|mu| > 0.5): predicted type is an extrapolation")
    zm, zp = z_pm(c.alpha)
    return RegionReport(c.alpha, float(c_s), mu, A, B, roots, label, zm, zp, predicted, c20, notes)


def root_signature(roots, tol: float = ROOT_TOL) -> Tuple[int, int, int, int]:
    """(zero, real nonzero, imaginary nonzero, off-axis) root counts."""
    lam = np.asarray(roots, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(lam))))
    re_small = np.abs(lam.real) <= tol * scale
    im_small = np.abs(lam.imag) <= tol * scale
    zero = re_small & im_small
    real = im_small & ~zero
    imag = re_small & ~zero
    off = ~(re_small | im_small)
    return int(zero.sum()), int(real.sum()), int(imag.sum()), int(off.sum())


def brute_force_label(roots) -> str:
    """Region label read off the root signature alone."""
    lam = np.asarray(roots, dtype=complex)
    nz, nr, ni, no = root_signature(lam)
    if nz == 2:
        return "C0" if nr == 2 else ("C1" if ni == 2 else "Singular")
    if nr == 4:
        return "Region2"
    if ni == 4:
        return "Region4"
    if no == 4:
        return "Region1"
    if nr == 2 and ni == 2:
        # sum of lambda^2 is B: dominant real pair gives 3R, dominant imaginary pair 3L
        return "Region3R" if float(np.sum(lam**2).real) > 0 else "Region3L"
    return "Singular"


def sweep(alphas, speeds, base: Optional[ModelCoefficients] = None):
    """Classify every (alpha, c_s) lattice point; singular speeds are skipped."""
    rows = []
    for a in alphas:
        coeffs = ModelCoefficients(alpha=float(a), a_uu=1.0) if base is None else _with_alpha(base, a)
        for cs in speeds:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    rep = classify(coeffs, cs)
            except errors.ValidationError:
                continue
            rows.append(rep)
    return rows


def _with_alpha(c: ModelCoefficients, alpha: float) -> ModelCoefficients:
    d = c.to_dict()
    d["alpha"] = float(alpha)
    return ModelCoefficients(**d)
