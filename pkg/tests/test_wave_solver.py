import numpy as np
import pytest

from kgb_lab import errors
from kgb_lab.closed_form import sech
from kgb_lab.spectral import build_grid, forward
from kgb_lab.wave_solver import (
    SolverOptions,
    assemble_symbols,
    extrapolate_cycle,
    initial_guess,
    normal_form_parameters,
    petviashvili_step,
    residual,
    ripple_diagnostic,
    solve_wave,
)

from conftest import gsw_coeffs


@pytest.fixture(scope="module")
def fig1_wave():
    from kgb_lab.model import ModelCoefficients

    c = ModelCoefficients(alpha=0.6, a_uu=1, a_uv=1, a_vv=1, b_uu=1, b_vv=1)
    g = build_grid(60, 1024)
    return c, g, solve_wave(c, 0.8, g)


def test_symbols(fig1_coeffs):
    g = build_grid(np.pi, 16)  # k = integer modes
    sym = assemble_symbols(fig1_coeffs, 0.8, g)
    assert sym.p1[0] == pytest.approx(0.64 - 0.36) and sym.p2[0] == 1
    assert sym.p1[1] == pytest.approx(0.92) and sym.p2[1] == pytest.approx(1.36)


def test_singular_symbol(fig1_coeffs):
    g = build_grid(np.pi, 16)
    cs = np.sqrt(0.36 / (1 + 2**2))  # p1(k=2) = 0
    with pytest.raises(errors.SingularSymbol) as ei:
        assemble_symbols(fig1_coeffs, cs, g)
    assert abs(abs(ei.value.k) - 2) < 1e-12 and ei.value.which == "p1"


def test_initial_guess_normal_form(fig1_coeffs):
    amp, rate = normal_form_parameters(fig1_coeffs, 0.8)
    assert amp == pytest.approx(0.42, rel=1e-13)
    assert rate == pytest.approx(0.330719, abs=1e-6)
    g = build_grid(40, 256)
    u, v = initial_guess("CswNormalForm", fig1_coeffs, 0.8, g)
    assert u.max() == pytest.approx(0.42, rel=1e-13)
    assert np.allclose(v, u * u)
    assert g.asymmetry(u) < 1e-15
    small, _ = normal_form_parameters(fig1_coeffs, 0.6 * (1 + 1e-8))
    assert 0 < small < 1e-7


def test_initial_guess_errors(fig1_coeffs):
    from kgb_lab.model import ModelCoefficients

    g = build_grid(40, 256)
    with pytest.raises(errors.ZeroAuu):
        initial_guess("CswNormalForm", ModelCoefficients(alpha=0.6, b_uv=1), 0.8, g)
    with pytest.raises(errors.NonPositiveMu):
        initial_guess("CswNormalForm", fig1_coeffs, 0.5, g)
    with pytest.raises(errors.GridMismatch):
        initial_guess("Custom", fig1_coeffs, 0.8, g, custom=(np.zeros(3), np.zeros(3)))


def test_step_at_exact_fixed_point(exact_wave):
    coeffs, p = exact_wave
    # at N=1024 the sampled wave itself carries RES ~4e-10 from truncation
    g = build_grid(60, 2048)
    sym = assemble_symbols(coeffs, p.c_s, g)
    u, v = p.u(g.x), p.v(g.x)
    st = petviashvili_step(u, v, sym, coeffs)
    assert abs(st.M - 1) < 1e-10 and st.RES < 1e-10
    assert max(np.max(np.abs(st.u - u)), np.max(np.abs(st.v - v))) < 1e-10


def test_step_overshoot_contracts(exact_wave):
    coeffs, p = exact_wave
    g = build_grid(60, 1024)
    sym = assemble_symbols(coeffs, p.c_s, g)
    st = petviashvili_step(1.2 * p.u(g.x), 1.2 * p.v(g.x), sym, coeffs)
    # quadratic nonlinearity: M = 1/1.2 exactly for a scaled fixed point
    assert st.M < 1 and st.M == pytest.approx(1 / 1.2, rel=1e-10)


def test_step_zero_input(exact_wave):
    coeffs, p = exact_wave
    g = build_grid(60, 256)
    sym = assemble_symbols(coeffs, p.c_s, g)
    with pytest.raises(errors.DegenerateStabilizer):
        petviashvili_step(np.zeros(g.N), np.zeros(g.N), sym, coeffs)
    assert residual(np.zeros(g.N), np.zeros(g.N), sym, coeffs) == 0


def test_residual_brute_force(fig1_coeffs):
    g = build_grid(20, 128)
    sym = assemble_symbols(fig1_coeffs, 0.8, g)
    rng = np.random.default_rng(1)
    u = np.exp(-g.x**2) * rng.uniform(0.5, 1.5)
    v = np.exp(-((g.x - 1) ** 2)) * rng.uniform(0.5, 1.5)
    # independent path: unnormalized numpy FFT rescaled by 1/sqrt(N), loop over modes
    U, V = np.fft.fft(u) / np.sqrt(g.N), np.fft.fft(v) / np.sqrt(g.N)
    F1 = np.fft.fft((u + v) ** 2) / np.sqrt(g.N)
    F2 = np.fft.fft(u * u + v * v) / np.sqrt(g.N)
    tot = 0.0
    for j in range(g.N):
        k = np.pi * (j if j < g.N // 2 else j - g.N) / g.L
        tot += abs((0.64 - 0.36 + 0.64 * k * k) * U[j] - F1[j]) ** 2
        tot += abs((1 + 0.36 * k * k) * V[j] - F2[j]) ** 2
    assert residual(u, v, sym, fig1_coeffs) == pytest.approx(np.sqrt(tot), rel=1e-13)


def test_extrapolation_scalar_toy():
    x = [0.0]
    for _ in range(4):
        x.append(0.5 * x[-1] + 1)
    assert extrapolate_cycle(x)[0] == pytest.approx(2.0, abs=1e-12)
    assert extrapolate_cycle([3.0, 3.0, 3.0])[0] == 3.0
    with pytest.raises(errors.ValidationError):
        extrapolate_cycle([1.0, 2.0])


def test_extrapolation_linear_vector_sequence():
    # x_{n+1} = A x_n + b with a 2x2 contraction: the minimal polynomial has degree 2
    A = np.array([[0.5, 0.2], [0.0, 0.3]])
    b = np.array([1.0, 2.0])
    xs = [np.zeros(2)]
    for _ in range(3):
        xs.append(A @ xs[-1] + b)
    fixed = np.linalg.solve(np.eye(2) - A, b)
    assert np.allclose(extrapolate_cycle(xs), fixed, atol=1e-12)


def test_extrapolation_rank_deficient():
    xs = [np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([2.0, 0.0]), np.array([3.0, 0.0])]
    with pytest.raises(errors.RankDeficient):
        extrapolate_cycle(xs)


def test_options_validation():
    with pytest.raises(errors.ValidationError):
        SolverOptions(accel="aitken")
    with pytest.raises(errors.ValidationError):
        SolverOptions(window=2)


def test_fig1_wave_properties(fig1_wave):
    c, g, w = fig1_wave
    assert w.converged and w.residual < 1e-10
    assert g.asymmetry(w.u) < 1e-10 and g.asymmetry(w.v) < 1e-10
    # positivity and monotonicity up to round-off in the far tail
    assert np.all(w.u > -1e-14 * w.u.max())
    right = w.u[g.x >= 0]
    assert np.all(np.diff(right) <= 1e-14 * w.u.max())
    assert w.realspace_residual <= 10 * w.residual
    assert w.classified.label == "Region2"


def test_fig1_m_consistency(fig1_wave):
    _, _, w = fig1_wave
    norm = np.sqrt(np.sum(w.u**2) + np.sum(w.v**2))
    for M, R in zip(w.trace.M[-5:], w.trace.RES[-5:]):
        assert abs(M - 1) <= 10 * R / norm


def test_grid_doubling(fig1_wave):
    c, g, w = fig1_wave
    g2 = build_grid(60, 2048)
    w2 = solve_wave(c, 0.8, g2)
    assert w2.converged
    assert max(np.max(np.abs(w2.u[::2] - w.u)), np.max(np.abs(w2.v[::2] - w.v))) < 1e-8


def test_symmetry_preserved_without_projection(fig1_coeffs):
    g = build_grid(60, 512)
    w = solve_wave(fig1_coeffs, 0.8, g, symmetric=False, max_iter=60, tol=1e-12)
    assert g.asymmetry(w.u) < 1e-10 and g.asymmetry(w.v) < 1e-10


def test_mpe_needs_fewer_evaluations(fig1_coeffs):
    g = build_grid(60, 1024)
    plain = solve_wave(fig1_coeffs, 0.8, g)
    mpe = solve_wave(fig1_coeffs, 0.8, g, extrapolate=True)
    assert plain.converged and mpe.converged
    assert mpe.evaluations < plain.evaluations


def test_coupled_exact_wave_by_newton(exact_wave):
    coeffs, p = exact_wave
    g = build_grid(60, 1024)
    guess = (1.2 * sech(1.3 * g.x) ** 2, 2.2 * sech(1.3 * g.x))
    w = solve_wave(coeffs, p.c_s, g, guess=guess, accel="newton")
    assert w.converged
    assert max(np.max(np.abs(w.u - p.u(g.x))), np.max(np.abs(w.v - p.v(g.x)))) < 1e-8


def test_plain_iteration_finds_uncoupled_branch(exact_wave):
    # with a_uv = b_uu = 0, (A sech^2, 0) also solves the profile system
    coeffs, p = exact_wave
    g = build_grid(60, 1024)
    w = solve_wave(coeffs, p.c_s, g)
    amp, rate = normal_form_parameters(coeffs, p.c_s)
    assert w.converged
    assert np.max(np.abs(w.u - amp * sech(rate * g.x) ** 2)) < 1e-12
    assert np.max(np.abs(w.v)) < 1e-12


def test_gsw_ripple(capsys):
    c = gsw_coeffs(1.12)
    g = build_grid(60, 1024)
    w = solve_wave(c, 1.4, g, max_iter=500)
    assert w.status in ("converged", "stagnated", "max_iter")
    assert w.classified.predicted == "GSW"
    print(f"GSW ripple {w.ripple.amplitude:.3e}, variation {w.ripple.variation:.2e}, status {w.status}")
    assert w.ripple.amplitude > 1e-3
    assert w.ripple.variation < 0.05


def test_ripple_diagnostic_windows():
    g = build_grid(8, 64)
    v = np.where(np.abs(g.x) >= 6, 0.5, 0.0)
    r = ripple_diagnostic(g, v)
    assert r.amplitude == 0.5 and r.variation == 0


def test_divergence_detected(fig1_coeffs):
    g = build_grid(60, 512)
    # a wildly non-smooth guess drives RES far above its initial value
    rng = np.random.default_rng(0)
    guess = (rng.standard_normal(g.N), rng.standard_normal(g.N))
    try:
        w = solve_wave(fig1_coeffs, 0.8, g, guess=guess, max_iter=200)
    except errors.Diverged:
        return
    assert w.status in ("converged", "stagnated", "max_iter")


def test_tail_warning():
    from kgb_lab.model import ModelCoefficients

    c = ModelCoefficients(alpha=0.6, a_uu=1, a_uv=1, a_vv=1, b_uu=1, b_vv=1)
    g = build_grid(60, 64)  # h ~ 1.9: under-resolved
    with pytest.warns(RuntimeWarning, match="spectral energy"):
        solve_wave(c, 0.8, g, max_iter=50)


def test_custom_guess_forward_consistency(fig1_coeffs):
    g = build_grid(30, 128)
    sym = assemble_symbols(fig1_coeffs, 0.8, g)
    u = 0.4 * sech(0.3 * g.x) ** 2
    st = petviashvili_step(u, u * u, sym, fig1_coeffs)
    assert np.isrealobj(st.u) and np.all(np.isfinite(st.u))
    assert forward(st.u).shape == (g.N,)


def test_computed_wave_satisfies_convolution_form(fig1_wave):
    from kgb_lab.closed_form import fixed_point_map, green_kernels

    c, g, w = fig1_wave
    Au, Av = fixed_point_map(green_kernels(c, 0.8), g, w.u, w.v)
    assert max(np.max(np.abs(Au - w.u)), np.max(np.abs(Av - w.v))) < 1e-6
