import pytest
from hypothesis import HealthCheck, settings

from qubit_reset import ResetTask, solve_bounded, solve_unbounded

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def unbounded_25():
    return solve_unbounded(ResetTask(25.0, 1e-3))


@pytest.fixture(scope="session")
def unbounded_100():
    return solve_unbounded(ResetTask(100.0, 1e-3))


@pytest.fixture(scope="session")
def touched_20():
    return solve_bounded(ResetTask(20.0, 1e-5, 15.0))
