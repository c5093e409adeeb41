import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wavesign.cwt import default_lattice
from wavesign.frames import FrameSystem
from wavesign.generators import DEFAULT_DX, DEFAULT_N, DEFAULT_X0
from wavesign.wavelets import combo, hilbert_poisson, poisson

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

GEOM = (DEFAULT_N, DEFAULT_DX, DEFAULT_X0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def lattice():
    return default_lattice(DEFAULT_N, DEFAULT_DX)


@pytest.fixture(scope="session")
def triple():
    return (poisson(), hilbert_poisson(), combo(1.0, 1.0))


@pytest.fixture(scope="session")
def pair_sys(lattice):
    return FrameSystem((poisson(), hilbert_poisson()), lattice, GEOM)


@pytest.fixture(scope="session")
def meas_sys(lattice, triple):
    return FrameSystem(triple, lattice, GEOM)


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
