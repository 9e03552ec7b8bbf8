import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from kts.bernstein import ControlNet

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@st.composite
def nets(draw, min_vars=2, max_vars=3, max_degree=3, n=None):
    """Random control nets with coefficients in [-1, 1]."""
    nvars = draw(st.integers(min_vars, max_vars))
    degrees = tuple(draw(st.integers(0, max_degree)) for _ in range(nvars))
    out = nvars - 1 if n is None else n
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return ControlNet(rng.uniform(-1, 1, size=tuple(m + 1 for m in degrees) + (out,)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[k])
