import numpy as np
import pytest

from lnoi.fde import DispersionCurve
from lnoi.spdc import PhaseMatchCurves


def linear_curve(center, n0, ng, lo, hi, samples=41, selector=""):
    """Curve with n(lam) = n0 + (n0 - ng)/center * (lam - center).

    A cubic spline reproduces the line exactly, so the group index at
    ``center`` is exactly ``ng``.
    """
    lam = np.linspace(lo, hi, samples)
    return DispersionCurve(lam, n0 + (n0 - ng) / center * (lam - center), selector=selector)


@pytest.fixture(scope="session")
def synthetic_curves():
    """Type-II curves with indices and group indices of the nominal rib."""
    return PhaseMatchCurves(
        linear_curve(775.0, 2.19472, 2.4277, 765, 785, selector="TM0"),
        linear_curve(1550.0, 1.97923, 2.4423, 1400, 1720, selector="TM0"),
        linear_curve(1550.0, 1.97290, 2.2564, 1400, 1720, selector="TE0"),
    )


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one ``PASS``/``FAIL`` line for the acceptance summary."""

    def record(criterion, passed, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  criterion {criterion:>2}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
