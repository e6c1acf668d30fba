import random

import pytest
from hypothesis import HealthCheck, settings

from synthcog.config import SimConfig
from synthcog.dataset import simulate
from synthcog.features import NoiseSpec

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# acceptance tests append (criterion, passed, detail); printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda x: x[0]):
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture(scope="session")
def small_config():
    return SimConfig(total_users=12, total_days=80, noise=NoiseSpec(0.1, 0.5, scope="day"), master_seed=7)


@pytest.fixture(scope="session")
def small_dataset(small_config):
    return simulate(small_config)
