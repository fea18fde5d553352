import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bbwave.model import bbm_bbm_coeffs, derive_physical

settings.register_profile(
    "default", deadline=None, max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def phys():
    return derive_physical(0.5, 0.9)


@pytest.fixture
def bbm(phys):
    return bbm_bbm_coeffs(phys)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
