import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from aplab.grid_core import Grid1D, GridFunction

# numba kernels compile on first call; no per-example deadline
settings.register_profile("aplab", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("aplab")

ACCEPTANCE_LINES: list[str] = []


def pytest_runtest_logreport(report):
    # acceptance tests tag themselves with record_property("acceptance", n)
    if report.when != "call":
        return
    num = dict(report.user_properties).get("acceptance")
    if num is not None:
        status = "PASS" if report.passed else "FAIL"
        ACCEPTANCE_LINES.append(f"acceptance criterion {num}: {status}  ({report.nodeid})")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gf(values, h=1.0, origin=0.0) -> GridFunction:
    return GridFunction.from_values(values, h=h, origin=origin)


def unit_grid(n) -> Grid1D:
    return Grid1D.unit(n)
