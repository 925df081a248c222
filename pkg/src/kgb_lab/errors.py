"""Exception hierarchy.

Two families: :class:`ValidationError` for bad inputs or violated
preconditions (CLI exit code 2) and :class:`NumericalError` for failures
that happen while computing (CLI exit code 3).
"""


class KgbError(Exception):
    """Base class for all package errors."""

    code = "KgbError"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class ValidationError(KgbError, ValueError):
    code = "ValidationError"


class NumericalError(KgbError, ArithmeticError):
    code = "NumericalError"


def _make(name, base, doc):
    return type(name, (base,), {"__doc__": doc, "code": name})


# grid / field preconditions
OddN = _make("OddN", ValidationError, "Node count is odd or too small.")
InvalidGrid = _make("InvalidGrid", ValidationError, "Non-positive half length or malformed grid.")
GridMismatch = _make("GridMismatch", ValidationError, "Fields live on different grids.")
NonZeroMean = _make("NonZeroMean", ValidationError, "Field must have zero mean.")
NonRealSymbol = _make("NonRealSymbol", ValidationError, "Fourier symbol is not conjugate-symmetric.")

# model
InvalidCoefficients = _make("InvalidCoefficients", ValidationError, "Coefficient set violates its invariants.")
NotHamiltonian = _make("NotHamiltonian", ValidationError, "b_uu = -a_uv and b_uv = -a_vv do not both hold.")
BNonZero = _make("BNonZero", ValidationError, "K0 closed form is only available for B = 0.")
AuuNonZero = _make("AuuNonZero", ValidationError, "Global existence predicate requires a_uu = 0.")

# regimes / closed forms
SpeedSingular = _make("SpeedSingular", ValidationError, "c_s^2 = 1: A and B are singular.")
Degenerate = _make("Degenerate", ValidationError, "c_s = 0.")
SuperSonic = _make("SuperSonic", ValidationError, "Requires c_s^2 < 1.")
SubSonic = _make("SubSonic", ValidationError, "Requires |c_s| > 1.")
NegativeRadicand = _make("NegativeRadicand", ValidationError, "Amplitude radicand is not positive.")
ZeroBuv = _make("ZeroBuv", ValidationError, "b_uv must be nonzero.")
OutOfRegime = _make("OutOfRegime", ValidationError, "Requires alpha^2 < c_s^2 < 1.")
ZeroAuu = _make("ZeroAuu", ValidationError, "Normal-form guess needs a_uu != 0.")
NonPositiveMu = _make("NonPositiveMu", ValidationError, "Normal-form guess needs mu > 0.")
GridTooShort = _make("GridTooShort", ValidationError, "Domain too short for the soliton width.")

# numerical failures
SingularSymbol = _make("SingularSymbol", NumericalError, "Symbol matrix S(k) is singular on the grid.")
DegenerateStabilizer = _make("DegenerateStabilizer", NumericalError, "Stabilizing factor denominator vanished.")
Diverged = _make("Diverged", NumericalError, "Iteration residual grew by 1e6 over its minimum.")
NonFinite = _make("NonFinite", NumericalError, "Non-finite values appeared during time stepping.")
RankDeficient = _make("RankDeficient", NumericalError, "Extrapolation system is rank deficient.")


class SingularSymbolAt(SingularSymbol):
    """Carries the offending wavenumber and which diagonal entry vanished."""

    code = "SingularSymbol"

    def __init__(self, k, which, value):
        self.k = float(k)
        self.which = which
        self.value = float(value)
        cond = "p1(k) = c_s^2 - alpha^2 + c_s^2 k^2 = 0" if which == "p1" else "p2(k) = 1 + (1 - c_s^2) k^2 = 0"
        super().__init__(f"S(k) singular at k={self.k:.12g}: {cond} (|{which}|={abs(self.value):.3e})")

    def to_dict(self):
        d = super().to_dict()
        d.update(k=self.k, entry=self.which)
        return d
