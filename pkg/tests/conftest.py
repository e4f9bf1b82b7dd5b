import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mhdjump.spectral import make_grid

settings.register_profile(
    "default",
    max_examples=20,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[(2, 16), (3, 8)], ids=["2d", "3d"])
def grid(request):
    return make_grid(*request.param)


@pytest.fixture
def grid2():
    return make_grid(2, 32)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
