import numpy as np
import pytest

from kgb_lab.closed_form import exact_csw_special
from kgb_lab.model import ModelCoefficients
from kgb_lab.spectral import build_grid


@pytest.fixture
def pi_grid():
    return build_grid(np.pi, 64)


@pytest.fixture(scope="session")
def exact_wave():
    """Coupled wave with alpha = 0.5, c_s^2 = 1/2, b_uv = 1, a_vv = -1."""
    return exact_csw_special(0.5, np.sqrt(0.5), 1.0, -1.0)


@pytest.fixture
def fig1_coeffs():
    # f1 = (u + v)^2, f2 = u^2 + v^2
    return ModelCoefficients(alpha=0.6, a_uu=1, a_uv=1, a_vv=1, b_uu=1, b_vv=1)


def gsw_coeffs(alpha):
    # f1 = u^2 + v^2, f2 = u^2
    return ModelCoefficients(alpha=alpha, a_uu=1, a_vv=1, b_uu=1)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
