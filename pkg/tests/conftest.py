import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


def random_halfplane(rng, n, xlim=3.0, ymin=0.1, ymax=4.0):
    return rng.uniform(-xlim, xlim, n) + 1j * rng.uniform(ymin, ymax, n)


def random_disc(rng, n, radius=0.9):
    return radius * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))


def random_mobius_h(rng):
    from hypcontract import MobiusH

    a, b, c, d = rng.normal(size=4)
    if a * d - b * c < 0:
        a, b = -a, -b
    return MobiusH(a, b, c, d)


def random_mobius_d(rng):
    from hypcontract import MobiusD

    return MobiusD(np.exp(2j * np.pi * rng.random()), complex(random_disc(rng, 1, 0.8)[0]))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
