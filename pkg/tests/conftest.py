import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tbtinv.symbol import TbtSymbol

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SIZES = [(m, n) for m in range(1, 5) for n in range(1, 5)]


@pytest.fixture
def scalar5():
    """The 1x1 instance t = 5."""
    return TbtSymbol(1, 1, np.array([[5.0]]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_points(rng, count, avoid=0.1):
    """Complex pairs at distance > `avoid` from +-i/2."""
    pts = []
    while len(pts) < count:
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        if min(np.abs(z - 0.5j).min(), np.abs(z + 0.5j).min()) > avoid:
            pts.append((complex(z[0]), complex(z[1])))
    return pts


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
