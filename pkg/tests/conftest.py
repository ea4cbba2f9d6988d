import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vspectra.model import DEFAULT_STABLE, DEFAULT_UNSTABLE, derive_coeffs

settings.register_profile(
    "vspectra", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("vspectra")

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def stable():
    return DEFAULT_STABLE, derive_coeffs(DEFAULT_STABLE)


@pytest.fixture(scope="session")
def unstable():
    return DEFAULT_UNSTABLE, derive_coeffs(DEFAULT_UNSTABLE)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
