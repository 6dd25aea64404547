import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from clusterfold import fixture_seed

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def a2():
    return fixture_seed("s_A2")


@pytest.fixture(scope="session")
def b2():
    return fixture_seed("s_B2")


@pytest.fixture(scope="session")
def a3():
    return fixture_seed("s_A3")


@pytest.fixture(scope="session")
def s24():
    return fixture_seed("s_S24")


@pytest.fixture(scope="session")
def markov():
    return fixture_seed("s_markov_folded")


@pytest.fixture(scope="session")
def kronecker():
    return fixture_seed("s_kronecker2")
