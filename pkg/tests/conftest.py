import numpy as np
import pytest

from burgerslab.acceptance import soliton
from burgerslab.lab import make_rng, noise_field


@pytest.fixture(scope="session")
def sol50():
    return soliton(50)


@pytest.fixture
def rng():
    return make_rng(1234)


def random_field(L, rng, scale=1.0, mean=0.0):
    u = noise_field(L, scale, rng)
    return u.with_mean(mean)


@pytest.fixture
def field_factory(rng):
    def make(L, scale=1.0, mean=0.0):
        return random_field(L, rng, scale, mean)

    return make


def max_abs(a):
    return float(np.max(np.abs(a)))


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(_ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
