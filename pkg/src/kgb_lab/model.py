"""KGB coefficients, quadratic nonlinearities, conserved functionals and the
global-existence / blow-up predicates.

The invariants are evaluated in the first-order variables (u, w, v, z),
where w is the zero-mean antiderivative of u_t and z = v_t.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Optional

import numpy as np

from . import _core, errors
from .spectral import PeriodicGrid, antiderivative_zero_mean, derivative, inner, integral

if TYPE_CHECKING:
    from .evolution import EvolutionState

HAM_TOL = 1e-12
COEFF_KEYS = ("alpha", "a_uu", "a_uv", "a_vv", "b_uu", "b_uv", "b_vv")


@dataclass(frozen=True)
class ModelCoefficients:
    alpha: float
    a_uu: float = 0.0
    a_uv: float = 0.0
    a_vv: float = 0.0
    b_uu: float = 0.0
    b_uv: float = 0.0
    b_vv: float = 0.0

    def __post_init__(self):
        for key in COEFF_KEYS:
            val = getattr(self, key)
            if not np.isfinite(val):
                raise errors.InvalidCoefficients(f"{key} must be finite, got {val}")
            object.__setattr__(self, key, float(val))
        if self.alpha == 0:
            raise errors.InvalidCoefficients("alpha must be nonzero")

    @property
    def quadratic(self) -> tuple:
        return (self.a_uu, self.a_uv, self.a_vv, self.b_uu, self.b_uv, self.b_vv)

    @property
    def is_linear(self) -> bool:
        return not any(self.quadratic)

    def validate_nonlinear(self) -> "ModelCoefficients":
        """The model proper excludes the all-zero quadratic part."""
        if self.is_linear:
            raise errors.InvalidCoefficients("not all six quadratic coefficients may vanish")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, data: dict) -> "ModelCoefficients":
        unknown = set(data) - set(COEFF_KEYS)
        if unknown:
            raise errors.InvalidCoefficients(f"unknown coefficient keys: {sorted(unknown)}")
        if "alpha" not in data:
            raise errors.InvalidCoefficients("alpha is required")
        try:
            return cls(**{k: float(v) for k, v in data.items()})
        except (TypeError, ValueError) as exc:
            raise errors.InvalidCoefficients(str(exc)) from exc


def parse_key_values(text: str) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise errors.ValidationError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = val
    return out


def load_coefficients(path) -> ModelCoefficients:
    """Read a coefficient set from a key=value file or its JSON equivalent."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    data = json.loads(text) if stripped.startswith("{") else parse_key_values(text)
    return ModelCoefficients.from_mapping(data)


def eval_nonlinearities(c: ModelCoefficients, u, v):
    u = np.ascontiguousarray(u, dtype=float)
    v = np.ascontiguousarray(v, dtype=float)
    if u.shape != v.shape:
        raise errors.GridMismatch(f"u has shape {u.shape}, v has shape {v.shape}")
    return _core.quadratic_forms(u, v, *c.quadratic)


@dataclass(frozen=True)
class HamiltonianStructure:
    B_ham: float
    C_ham: float


def hamiltonian_structure(c: ModelCoefficients, tol: float = HAM_TOL) -> HamiltonianStructure:
    """(B, C) when b_uu = -a_uv and b_uv = -a_vv; raises NotHamiltonian otherwise."""
    if abs(c.b_uu + c.a_uv) > tol or abs(c.b_uv + c.a_vv) > tol:
        raise errors.NotHamiltonian(
            f"b_uu + a_uv = {c.b_uu + c.a_uv:.3e}, b_uv + a_vv = {c.b_uv + c.a_vv:.3e}; E is not guaranteed conserved"
        )
    return HamiltonianStructure(c.b_uu, c.b_uv)


def try_hamiltonian(c: ModelCoefficients) -> Optional[HamiltonianStructure]:
    try:
        return hamiltonian_structure(c)
    except errors.NotHamiltonian:
        return None


@dataclass(frozen=True)
class InvariantSnapshot:
    t: float
    E: float
    F: float


def potential_density(c: ModelCoefficients, H: HamiltonianStructure, u, v) -> np.ndarray:
    """-(a_uu/3) u^3 + (b_vv/3) v^3 + B u^2 v + C u v^2."""
    return -c.a_uu / 3.0 * u**3 + c.b_vv / 3.0 * v**3 + H.B_ham * u * u * v + H.C_ham * u * v * v


def energy(c: ModelCoefficients, H: HamiltonianStructure, state: "EvolutionState") -> float:
    g = state.grid
    wx = derivative(g, state.w, 1)
    vx = derivative(g, state.v, 1)
    quad = c.alpha**2 * state.u**2 + state.w**2 + wx**2 + state.v**2 + vx**2 + state.z**2
    return 0.5 * integral(g, quad) - integral(g, potential_density(c, H, state.u, state.v))


def momentum(state: "EvolutionState") -> float:
    g = state.grid
    ux = derivative(g, state.u, 1)
    wx = derivative(g, state.w, 1)
    vx = derivative(g, state.v, 1)
    return integral(g, state.u * state.w + ux * wx + vx * state.z)


def k0_constant(c: ModelCoefficients, H: HamiltonianStructure) -> float:
    """K0 = 5^(-3/4) sqrt(6) |b_vv| + 2^(-1/4) sqrt(|C|), valid for B = 0 only."""
    if H.B_ham != 0.0:
        raise errors.BNonZero(f"B = {H.B_ham} != 0: the best H1->Linf constant is not available in closed form")
    return 5.0 ** (-0.75) * np.sqrt(6.0) * abs(c.b_vv) + 2.0 ** (-0.25) * np.sqrt(abs(H.C_ham))


@dataclass(frozen=True)
class LemmaThreshold:
    A: float
    admissible: bool


def lemma_gb_threshold(C1: float, C2: float, s: float) -> LemmaThreshold:
    """A = (s C2)^(1/(1-s)); admissible iff C1 < (s-1)/s * A."""
    if not s > 1:
        raise errors.ValidationError(f"s must exceed 1, got {s}")
    if not C2 > 0:
        raise errors.ValidationError(f"C2 must be positive, got {C2}")
    if C1 < 0:
        raise errors.ValidationError(f"C1 must be nonnegative, got {C1}")
    A = (s * C2) ** (1.0 / (1.0 - s))
    return LemmaThreshold(A, C1 < (s - 1.0) / s * A)


def _initial_state(grid: PeriodicGrid, u0, u1, v0, v1):
    from .evolution import to_first_order

    return to_first_order(grid, u0, u1, v0, v1)


@dataclass(frozen=True)
class GlobalExistenceReport:
    holds: bool
    energy: float
    energy_bound: float
    norm_sum: float
    norm_bound: float
    K0: float
    # bound obtained by composing the lemma with y <= 2E(0) + (2/3) K0 y^(3/2)
    energy_bound_from_lemma: float


def global_existence_report(c, H, grid, u0, u1, v0, v1) -> GlobalExistenceReport:
    if c.a_uu != 0.0:
        raise errors.AuuNonZero(f"a_uu = {c.a_uu}; the global existence result needs a_uu = 0")
    K0 = k0_constant(c, H)
    state = _initial_state(grid, u0, u1, v0, v1)
    E0 = energy(c, H, state)
    v0x = derivative(grid, state.v, 1)
    norm_sum = (
        inner(grid, u1, u1)
        + c.alpha**2 * inner(grid, state.u, state.u)
        + inner(grid, state.v, state.v)
        + inner(grid, state.z, state.z)
        + inner(grid, v0x, v0x)
    )
    if K0 == 0.0:
        e_bound = n_bound = e_lemma = np.inf
    else:
        e_bound = K0**-6 / 6.0
        n_bound = K0**-3
        e_lemma = K0**-2 / 6.0
    return GlobalExistenceReport(
        holds=bool(E0 < e_bound and norm_sum < n_bound),
        energy=E0,
        energy_bound=e_bound,
        norm_sum=norm_sum,
        norm_bound=n_bound,
        K0=K0,
        energy_bound_from_lemma=e_lemma,
    )


def global_existence_predicate(c, H, grid, u0, u1, v0, v1) -> bool:
    return global_existence_report(c, H, grid, u0, u1, v0, v1).holds


@dataclass(frozen=True)
class BlowupVerdict:
    case: Optional[str]  # "NegativeEnergy", "PositiveEnergyCondition" or None
    energy: float
    lhs: float  # (2 E(0))^(1/2), nan when E(0) < 0
    rhs: float

    def __bool__(self):
        return self.case is not None


def blowup_predicate(c, H, grid, u0, u1, v0, v1) -> BlowupVerdict:
    """Which sufficient blow-up condition holds for the data, if any."""
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    a0 = antiderivative_zero_mean(grid, u0)
    a1 = antiderivative_zero_mean(grid, u1)
    state = _initial_state(grid, u0, u1, v0, v1)
    E0 = energy(c, H, state)
    num = inner(grid, a0, a1) + inner(grid, u0, u1) + inner(grid, state.v, state.z)
    den = np.sqrt(inner(grid, a0, a0) + inner(grid, u0, u0) + inner(grid, state.v, state.v))
    rhs = num / den if den > 0 else 0.0
    if E0 < 0:
        return BlowupVerdict("NegativeEnergy", E0, float("nan"), rhs)
    lhs = float(np.sqrt(2.0 * E0))
    return BlowupVerdict("PositiveEnergyCondition" if lhs < rhs else None, E0, lhs, rhs)


def exclusivity_search(c, H, grid, n_samples: int = 200, seed: int = 0, max_scale: float = 3.0):
    """Random mean-zero data on which both predicates hold (expected: none)."""
    rng = np.random.default_rng(seed)
    x = grid.x
    found = []
    for _ in range(n_samples):
        fields = []
        for _f in range(4):
            amp, width, shift = rng.uniform(-max_scale, max_scale), rng.uniform(0.3, 3.0), rng.uniform(-2, 2)
            bump = amp / np.cosh((x - shift) / width) ** 2
            fields.append(bump - bump.mean())
        u0, u1, v0, v1 = fields
        g_ok = global_existence_predicate(c, H, grid, u0, u1, v0, v1)
        b = blowup_predicate(c, H, grid, u0, u1, v0, v1)
        if g_ok and b:
            found.append({"u0": u0, "u1": u1, "v0": v0, "v1": v1, "case": b.case, "energy": b.energy})
    return found
