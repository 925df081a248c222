"""Command line entry point: ``kgb-lab <subcommand> ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.  Failures
print a JSON error report on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
import warnings
from pathlib import Path

import numpy as np
import scipy

from . import __version__, errors, fileio
from ._core import BACKEND
from .closed_form import (
    KdVAnsatz,
    constant_fixed_points,
    exact_csw_coefficient_residuals,
    exact_csw_special,
    green_kernels,
    imbq_soliton,
    sech,
)
from .evolution import EvolutionConfig, EvolutionState, evolve, relative_drift, to_first_order
from .kdv import bounded_in_time, build_initial_data, fit_exponent, run_experiment
from .model import COEFF_KEYS, ModelCoefficients, energy, momentum, try_hamiltonian
from .regimes import classify, sweep
from .spectral import build_grid, derivative
from .wave_solver import ACCELERATORS, SolverOptions, solve_wave

log = logging.getLogger("kgb_lab")

DRIFT_BUDGET = 1e-6


def _versions() -> dict:
    return {"kgb_lab": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version(), "kernels": BACKEND}


# ---------------------------------------------------------------- helpers


def _add_coeff_args(p, alpha_required=True):
    p.add_argument("--alpha", type=float, required=alpha_required)
    for key in COEFF_KEYS[1:]:
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=float, default=None)
    p.add_argument("--coeffs", help="key=value or JSON file with coefficient set (flags override)")


def _coeffs_from_args(a) -> ModelCoefficients:
    data = {}
    if getattr(a, "coeffs", None):
        data.update(fileio.load_config(a.coeffs))
        fileio.check_keys(data, COEFF_KEYS)
    if a.alpha is not None:
        data["alpha"] = a.alpha
    for key in COEFF_KEYS[1:]:
        val = getattr(a, key, None)
        if val is not None:
            data[key] = val
    return ModelCoefficients.from_mapping(data)


def _float_list(text: str):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise errors.ValidationError(f"bad number list {text!r}") from exc


def _range(text: str):
    """'lo:hi:n' -> linspace."""
    try:
        lo, hi, n = text.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise errors.ValidationError(f"range must be lo:hi:n, got {text!r}") from exc


def _emit(obj, out=None):
    text = fileio.dumps(obj)
    if out:
        path = fileio.output_dir(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    sys.stdout.write(text)


# ---------------------------------------------------------------- classify


def cmd_classify(a) -> int:
    if a.sweep:
        if not (a.alpha_range and a.cs_range):
            raise errors.ValidationError("--sweep needs --alpha-range and --cs-range")
        base = ModelCoefficients(alpha=1.0, a_uu=a.a_uu if a.a_uu is not None else 1.0)
        rows = sweep(_range(a.alpha_range), _range(a.cs_range), base)
        cols = [[r.alpha for r in rows], [r.c_s for r in rows], [r.mu for r in rows], [r.A for r in rows], [r.B for r in rows]]
        labels = [r.label for r in rows]
        pred = [r.predicted or "None" for r in rows]
        target = sys.stdout if not a.out else open(fileio.output_dir(a.out), "w", newline="")
        try:
            target.write("alpha,c_s,mu,A,B,label,predicted\n")
            for i in range(len(rows)):
                target.write(",".join([fileio.fmt(c[i]) for c in cols] + [labels[i], pred[i]]) + "\n")
        finally:
            if target is not sys.stdout:
                target.close()
        return 0
    if a.alpha is None or a.cs is None:
        raise errors.ValidationError("classify needs --alpha and --cs (or --sweep)")
    c = ModelCoefficients(alpha=a.alpha, a_uu=a.a_uu if a.a_uu is not None else 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = classify(c, a.cs)
    _emit({"inputs": {"alpha": a.alpha, "c_s": a.cs, "a_uu": c.a_uu}, **rep.to_dict()}, a.out)
    return 0


# ---------------------------------------------------------------- solve-wave


def _sech_guess(text, x, power):
    parts = _float_list(text)
    if len(parts) not in (2, 3):
        raise errors.ValidationError(f"guess must be AMP,RATE[,POWER], got {text!r}")
    pw = parts[2] if len(parts) == 3 else power
    return parts[0] * sech(parts[1] * x) ** pw


def cmd_solve_wave(a) -> int:
    c = _coeffs_from_args(a)
    grid = build_grid(a.L, a.N)
    opts = SolverOptions(tol=a.tol, max_iter=a.max_iter, accel=a.extrapolate, window=a.window, symmetric=not a.no_symmetry)
    guess = None
    if a.guess_u or a.guess_v:
        if not (a.guess_u and a.guess_v):
            raise errors.ValidationError("--guess-u and --guess-v must be given together")
        guess = (_sech_guess(a.guess_u, grid.x, 2.0), _sech_guess(a.guess_v, grid.x, 1.0))
    w = solve_wave(c, a.cs, grid, opts, guess=guess)
    out = fileio.output_dir(a.out_dir)
    fileio.write_csv(out / "profile.csv", ["x", "u", "v"], [grid.x, w.u, w.v])
    fileio.write_csv(out / "trace.csv", ["n", "M", "RES"], [w.trace.n, w.trace.M, w.trace.RES])
    meta = {
        "command": "solve-wave",
        "coefficients": c.to_dict(),
        "c_s": a.cs,
        "grid": {"L": grid.L, "N": grid.N},
        "options": opts.__dict__,
        "guess": {"u": a.guess_u, "v": a.guess_v} if guess is not None else "CswNormalForm",
        "status": w.status,
        "evaluations": w.evaluations,
        "residual": w.residual,
        "realspace_residual": w.realspace_residual,
        "ripple": {"amplitude": w.ripple.amplitude, "window_sups": w.ripple.window_sups, "variation": w.ripple.variation},
        "region": w.classified.to_dict() if w.classified else None,
        "warnings": w.warnings,
        "versions": _versions(),
    }
    fileio.write_json(out / "wave.json", meta)
    _emit({k: meta[k] for k in ("status", "evaluations", "residual")})
    return 0


# ---------------------------------------------------------------- oracle


def cmd_oracle(a) -> int:
    out = fileio.output_dir(a.out_dir)
    grid = build_grid(a.L, a.N)
    x = grid.x
    if a.kind == "exact-csw":
        coeffs, p = exact_csw_special(a.alpha, a.cs, a.b_uv, a.a_vv)
        fileio.write_csv(out / "profile.csv", ["x", "u", "v"], [x, p.u(x), p.v(x)])
        side = {**p.to_dict(), "coefficients": coeffs.to_dict(), "coefficient_residuals": exact_csw_coefficient_residuals(coeffs, p)}
    elif a.kind == "kdv-soliton":
        ans = KdVAnsatz(a.eps, a.c, a.alpha, a.a_uu)
        u = ans.profile(x, a.t, period=2 * grid.L)
        fileio.write_csv(out / "profile.csv", ["x", "u", "v"], [x, u, np.zeros_like(u)])
        side = {"eps": a.eps, "c": a.c, "alpha": a.alpha, "a_uu": a.a_uu, "t": a.t, "amplitude": ans.eps**2 * ans.amplitude, "width_factor": ans.width, "speed": ans.speed}
    elif a.kind == "imbq":
        q = imbq_soliton(a.p, a.cs, x)
        fileio.write_csv(out / "profile.csv", ["x", "u", "v"], [x, q, np.zeros_like(q)])
        side = {"p": a.p, "c_s": a.cs, "peak": float(imbq_soliton(a.p, a.cs, 0.0))}
    elif a.kind == "kernels":
        c = _coeffs_from_args(a)
        kp = green_kernels(c, a.cs)
        fileio.write_csv(out / "profile.csv", ["x", "u", "v"], [x, kp.k_base(x), kp.m_base(x)])
        side = {"s": kp.s, "r": kp.r, "u_scale": kp.u_scale, "v_scale": kp.v_scale, "coefficients": c.to_dict()}
    else:  # fixed-points
        c = _coeffs_from_args(a)
        pts = constant_fixed_points(c, a.cs)
        side = {"coefficients": c.to_dict(), "c_s": a.cs, "points": [p.__dict__ for p in pts]}
    side["kind"] = a.kind
    fileio.write_json(out / "oracle.json", side)
    _emit(side)
    return 0


# ---------------------------------------------------------------- evolve

EVOLVE_KEYS = set(COEFF_KEYS) | {
    "L", "N", "T", "dt", "monitor_stride", "beta", "t0", "dealias", "initial",
    "cs", "eps", "c", "u_amp", "u_width", "v_amp", "v_width", "u1_amp", "snapshots",
}
INITIAL_KINDS = ("zero", "sech", "exact_csw", "kdv")


def _num(cfg, key, default=None, cast=float):
    if key not in cfg:
        if default is None:
            raise errors.ValidationError(f"config key {key!r} is required")
        return default
    try:
        return cast(cfg[key])
    except (TypeError, ValueError) as exc:
        raise errors.ValidationError(f"config key {key!r}: {exc}") from exc


def _bool(val) -> bool:
    if isinstance(val, bool):
        return val
    s = str(val).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise errors.ValidationError(f"not a boolean: {val!r}")


def build_evolution(cfg: dict):
    """Resolve a flat config into (EvolutionConfig, metadata of applied values)."""
    fileio.check_keys(cfg, EVOLVE_KEYS)
    kind = str(cfg.get("initial", "sech"))
    if kind not in INITIAL_KINDS:
        raise errors.ValidationError(f"initial must be one of {INITIAL_KINDS}, got {kind!r}")
    grid = build_grid(_num(cfg, "L"), _num(cfg, "N", cast=int))
    x = grid.x
    applied = {"initial": kind, "L": grid.L, "N": grid.N}
    if kind == "exact_csw":
        cs = _num(cfg, "cs")
        coeffs, p = exact_csw_special(_num(cfg, "alpha"), cs, _num(cfg, "b_uv", 1.0), _num(cfg, "a_vv", -1.0))
        for key in ("a_uu", "a_uv", "b_uu", "b_vv"):
            if key in cfg and abs(float(cfg[key]) - getattr(coeffs, key)) > 1e-12:
                raise errors.InvalidCoefficients(f"{key}={cfg[key]} conflicts with the exact-wave constraint ({getattr(coeffs, key)})")
        u0, v0 = p.u(x), p.v(x)
        u1 = -cs * derivative(grid, u0, 1)
        v1 = -cs * derivative(grid, v0, 1)
        applied.update(cs=cs, wave=p.to_dict())
    else:
        coeffs = ModelCoefficients.from_mapping({k: cfg[k] for k in COEFF_KEYS if k in cfg})
        if kind == "zero":
            u0 = u1 = v0 = v1 = np.zeros(grid.N)
        elif kind == "sech":
            ua, uw = _num(cfg, "u_amp", 0.0), _num(cfg, "u_width", 1.0)
            va, vw = _num(cfg, "v_amp", 0.0), _num(cfg, "v_width", 1.0)
            u1a = _num(cfg, "u1_amp", 0.0)
            bump = sech(x / uw) ** 2
            u0 = ua * (bump - bump.mean())
            u1 = u1a * derivative(grid, bump, 1)
            v0 = va * sech(x / vw)
            v1 = np.zeros(grid.N)
            applied.update(u_amp=ua, u_width=uw, v_amp=va, v_width=vw, u1_amp=u1a)
        else:  # kdv
            eps, c = _num(cfg, "eps"), _num(cfg, "c", 0.8)
            u0, u1, v0, v1 = build_initial_data(eps, c, coeffs.alpha, coeffs.a_uu, grid)
            applied.update(eps=eps, c=c)
    T = _num(cfg, "T")
    dt = _num(cfg, "dt", -1.0)
    dt = None if dt < 0 else dt
    stride = _num(cfg, "monitor_stride", 10, int)
    t0 = _num(cfg, "t0", 0.0)
    beta_raw = cfg.get("beta", 0.0)
    if str(beta_raw).strip().lower() == "auto":
        # beta = -E(0) for negative energy data, else 0
        H = try_hamiltonian(coeffs)
        E0 = energy(coeffs, H, to_first_order(grid, u0, u1, v0, v1)) if H is not None else 0.0
        beta = max(0.0, -E0)
    else:
        beta = _num(cfg, "beta", 0.0)
    dealias = _bool(cfg.get("dealias", True))
    ec = EvolutionConfig(coeffs, grid, u0, u1, v0, v1, T=T, dt=dt, monitor_stride=stride, beta=beta, t0=t0, dealias=dealias)
    applied.update(T=T, dt=dt, monitor_stride=stride, beta=beta, t0=t0, dealias=dealias, coefficients=coeffs.to_dict())
    return ec, applied


def cmd_evolve(a) -> int:
    cfg = fileio.load_config(a.config)
    ec, applied = build_evolution(cfg)
    res = evolve(ec)
    out = fileio.output_dir(a.out_dir)
    grid = ec.grid
    names = []
    for i, st in enumerate(res.states):
        name = f"states/state_{i:06d}.csv"
        fileio.write_csv(out / name, ["x", "u", "w", "v", "z"], [grid.x, st.u, st.w, st.v, st.z])
        names.append(name)
    fileio.write_csv(out / "states/index.csv", ["n", "t"], [list(range(len(names))), [s.t for s in res.states]])
    inv = res.invariants
    fileio.write_csv(out / "invariants.csv", ["t", "E", "F"], [[s.t for s in inv], [s.E for s in inv], [s.F for s in inv]])
    t, I, I1 = res.monitor.t, res.monitor.I, res.monitor.I1
    fileio.write_csv(out / "blowup.csv", ["t", "I", "I1"], [t, I, I1])
    applied["dt"] = res.dt
    d2 = res.monitor.second_differences()
    meta = {
        "command": "evolve",
        "config": {k: cfg[k] for k in sorted(cfg)},
        "applied": applied,
        "status": res.status,
        "message": res.message,
        "steps": res.steps,
        "final_time": res.final.t,
        "hamiltonian": res.hamiltonian,
        "energy_drift": relative_drift([s.E for s in inv]) if inv else None,
        "momentum_drift": relative_drift([s.F for s in inv]) if inv else None,
        "boundary_contamination": res.boundary_contamination,
        "I1_max_second_difference": float(d2.max()) if d2.size else None,
        "versions": _versions(),
    }
    fileio.write_json(out / "run.json", meta)
    _emit({k: meta[k] for k in ("status", "final_time", "energy_drift", "momentum_drift")})
    return 0


# ---------------------------------------------------------------- check-invariants


def check_invariants(run_dir) -> dict:
    run_dir = Path(run_dir)
    meta_path = run_dir / "run.json"
    if not meta_path.exists():
        raise errors.ValidationError(f"{meta_path} not found")
    try:
        meta = json.loads(meta_path.read_text())
        coeffs = ModelCoefficients.from_mapping(meta["applied"]["coefficients"])
        L, N = meta["applied"]["L"], meta["applied"]["N"]
    except (KeyError, ValueError, TypeError) as exc:
        raise errors.ValidationError(f"{meta_path}: malformed metadata ({exc})") from exc
    grid = build_grid(L, N)
    index = fileio.read_csv(run_dir / "states/index.csv", ["n", "t"])
    E, F, ts = [], [], []
    H = try_hamiltonian(coeffs)
    for n, t in zip(index["n"], index["t"]):
        d = fileio.read_csv(run_dir / f"states/state_{int(n):06d}.csv", ["x", "u", "w", "v", "z"])
        if d["x"].size != N:
            raise errors.ValidationError(f"snapshot {int(n)} has {d['x'].size} rows, expected {N}")
        st = EvolutionState(grid, d["u"], d["w"], d["v"], d["z"], float(t))
        ts.append(float(t))
        F.append(momentum(st))
        if H is not None:
            E.append(energy(coeffs, H, st))
    dF = relative_drift(F)
    report = {"run_dir": str(run_dir), "snapshots": len(ts), "momentum_drift": dF, "budget": DRIFT_BUDGET}
    if H is None:
        report.update(
            energy_drift=None,
            verdict="E not guaranteed conserved; drift reported, not judged",
            passed=None,
            momentum_drift_note="F drift reported, not judged",
        )
    else:
        dE = relative_drift(E)
        report.update(energy_drift=dE, passed=bool(dE < DRIFT_BUDGET and dF < DRIFT_BUDGET))
        report["verdict"] = "pass" if report["passed"] else "fail"
    return report


def cmd_check_invariants(a) -> int:
    rep = check_invariants(a.run_dir)
    _emit(rep)
    if a.strict and rep["passed"] is False:
        return 1
    return 0


# ---------------------------------------------------------------- kdv-error


def cmd_kdv_error(a) -> int:
    eps_list = _float_list(a.eps_list)
    if len(eps_list) < 2 or any(e <= 0 for e in eps_list):
        raise errors.ValidationError("--eps-list needs at least two positive values")
    table = run_experiment(eps_list, jobs=a.jobs, T=a.T, c=a.c, alpha=a.alpha, dt=a.dt, stride=a.stride)
    out = fileio.output_dir(a.out_dir)
    eps, t, eu, ev = zip(*table.rows())
    fileio.write_csv(out / "errors.csv", ["epsilon", "t", "err_u", "err_v"], [eps, t, eu, ev])
    err = np.maximum(eu, ev)
    fileio.write_csv(out / "semilog.csv", ["epsilon", "t", "log10_err"], [eps, t, np.log10(np.maximum(err, 1e-300))])
    fit = fit_exponent(table)
    per_eps = {}
    for e in table.epsilons():
        ts, su, sv = table.series(e)
        per_eps[fileio.fmt(e)] = {
            "max_err_u": float(su.max()),
            "max_err_v": float(sv.max()),
            "bounded_in_time_u": bounded_in_time(ts, su),
            "v_over_eps35": float(sv.max() / e**3.5),
        }
    meta = {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r2": fit.r2,
        "slope_ci95": fit.slope_ci,
        "fit_u": fit_exponent(table, "u").slope,
        "fit_v": fit_exponent(table, "v").slope,
        "target": 3.5,
        "per_eps": per_eps,
        "parameters": {"eps_list": eps_list, "T": a.T, "c": a.c, "alpha": a.alpha, "dt": a.dt, "stride": a.stride, "coefficients": "all six = 1"},
        "versions": _versions(),
    }
    fileio.write_json(out / "fit.json", meta)
    _emit({k: meta[k] for k in ("slope", "r2", "fit_u", "fit_v")})
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kgb-lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("classify", help="linearization regime at (alpha, c_s)")
    q.add_argument("--alpha", type=float)
    q.add_argument("--cs", type=float)
    q.add_argument("--a-uu", dest="a_uu", type=float, default=None, help="enters c20 = -a_uu/c_s^2")
    q.add_argument("--sweep", action="store_true")
    q.add_argument("--alpha-range", help="lo:hi:n")
    q.add_argument("--cs-range", help="lo:hi:n")
    q.add_argument("--out")
    q.set_defaults(func=cmd_classify)

    q = sub.add_parser("solve-wave", help="Petviashvili solve for a traveling profile")
    _add_coeff_args(q)
    q.add_argument("--cs", type=float, required=True)
    q.add_argument("--L", type=float, default=60.0)
    q.add_argument("--N", type=int, default=1024)
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--max-iter", type=int, default=500)
    q.add_argument("--extrapolate", nargs="?", const="mpe", default="none", choices=ACCELERATORS)
    q.add_argument("--window", type=int, default=5)
    q.add_argument("--no-symmetry", action="store_true")
    q.add_argument("--guess-u", help="AMP,RATE[,POWER]: AMP sech^POWER(RATE x), POWER defaults to 2")
    q.add_argument("--guess-v", help="AMP,RATE[,POWER], POWER defaults to 1")
    q.add_argument("--out-dir", default="wave")
    q.set_defaults(func=cmd_solve_wave)

    q = sub.add_parser("oracle", help="analytic profiles and artifacts")
    q.add_argument("kind", choices=("exact-csw", "kdv-soliton", "imbq", "kernels", "fixed-points"))
    _add_coeff_args(q, alpha_required=False)
    q.add_argument("--cs", type=float, default=None)
    q.add_argument("--eps", type=float, default=0.05)
    q.add_argument("--c", type=float, default=0.8)
    q.add_argument("--t", type=float, default=0.0)
    q.add_argument("--p", type=int, default=2)
    q.add_argument("--L", type=float, default=60.0)
    q.add_argument("--N", type=int, default=1024)
    q.add_argument("--out-dir", default="oracle")
    q.set_defaults(func=cmd_oracle)

    q = sub.add_parser("evolve", help="integrate an initial-value problem")
    q.add_argument("--config", required=True)
    q.add_argument("--out-dir", default="run")
    q.set_defaults(func=cmd_evolve)

    q = sub.add_parser("kdv-error", help="KdV approximation error scaling")
    q.add_argument("--eps-list", default="0.1,0.075,0.05")
    q.add_argument("--T", type=float, default=100.0)
    q.add_argument("--c", type=float, default=0.8)
    q.add_argument("--alpha", type=float, default=1.0)
    q.add_argument("--dt", type=float, default=0.01)
    q.add_argument("--stride", type=int, default=100)
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--out-dir", default="kdv")
    q.set_defaults(func=cmd_kdv_error)

    q = sub.add_parser("check-invariants", help="recompute E, F drifts of an evolve run")
    q.add_argument("run_dir")
    q.add_argument("--strict", action="store_true", help="exit 1 when a judged drift exceeds the budget")
    q.set_defaults(func=cmd_check_invariants)
    return p


def _oracle_defaults(a):
    if a.command != "oracle":
        return
    need = {"exact-csw": ("alpha", "cs"), "kdv-soliton": ("alpha",), "imbq": ("cs",), "kernels": ("alpha", "cs"), "fixed-points": ("alpha", "cs")}[a.kind]
    for key in need:
        if getattr(a, key) is None:
            raise errors.ValidationError(f"oracle {a.kind} needs --{key}")
    if a.kind == "exact-csw":
        a.b_uv = 1.0 if a.b_uv is None else a.b_uv
        a.a_vv = -1.0 if a.a_vv is None else a.a_vv
    if a.kind == "kdv-soliton":
        a.a_uu = 1.0 if a.a_uu is None else a.a_uu


def dispatch(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        _oracle_defaults(a)
        return a.func(a)
    except errors.ValidationError as exc:
        sys.stderr.write(fileio.dumps({**exc.to_dict(), "exit_code": 2}))
        return 2
    except errors.NumericalError as exc:
        sys.stderr.write(fileio.dumps({**exc.to_dict(), "exit_code": 3}))
        return 3


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
