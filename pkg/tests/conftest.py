import numpy as np
import pytest

from vortexpair.grid import Domain, Field

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def small():
    return Domain(half_width=1.0, strip_height=1.0, nx=8, ny=4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_field(domain, rng, density=0.5, scale=1.0):
    v = rng.random(domain.shape) * scale
    v[rng.random(domain.shape) > density] = 0.0
    return Field(domain, v)
