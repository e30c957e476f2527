import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_profile(rng, m, ratio=None):
    """Profile with random per-state errors; ``ratio`` pins max/min."""
    from starsim.profiler import ErrorProfile

    n = 1 << m
    e = rng.uniform(1e-4, 1e-2, n)
    if ratio is not None:
        e = 1e-4 * (1 + (ratio - 1) * (e - e.min()) / (e.max() - e.min()))
    return ErrorProfile(m=m, e=e, provenance="test")


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    lines = [test_acceptance.RESULTS[k] for k in sorted(test_acceptance.RESULTS)]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
