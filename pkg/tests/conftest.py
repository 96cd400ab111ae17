import numpy as np
import pytest

from linswim.engine import ShapePath
from linswim.highre import highre_swimmer
from linswim.geometry import ScallopGeometry
from linswim.lowre import ALPHA_REST, lowre_swimmer

STROKE = np.pi / 3


def cosine_stroke(horizon=2 * np.pi, amplitude=STROKE, rest=ALPHA_REST, phase=0.0):
    """Opening ``rest + amplitude cos(t + phase)`` with exact rate and acceleration."""
    return ShapePath(
        lambda t: (rest + amplitude * np.cos(t + phase), -amplitude * np.sin(t + phase)),
        horizon,
        accel=lambda t: -amplitude * np.cos(t + phase),
    )


@pytest.fixture(scope="session")
def lowre_tab():
    return lowre_swimmer(tabulate=True)


@pytest.fixture(scope="session")
def lowre_direct():
    return lowre_swimmer()


@pytest.fixture(scope="session")
def highre_tab():
    return highre_swimmer(ScallopGeometry(panel_count=64))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Recorder for acceptance outcomes: ``criterion(n, ok, detail)``."""

    def record(n, ok, detail):
        ACCEPTANCE[n] = (bool(ok), detail)
        print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 12):
        ok, detail = ACCEPTANCE.get(n, (False, "not run"))
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
