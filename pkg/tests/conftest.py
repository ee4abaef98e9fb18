import numpy as np
import pytest
from hypothesis import settings

from finrig import conjugate_map, doubling, make_trig_map

# property tests are derandomized so every run replays the same examples
settings.register_profile("repro", derandomize=True, deadline=None, max_examples=40)
settings.load_profile("repro")


@pytest.fixture(scope="session")
def dbl():
    return doubling()


@pytest.fixture(scope="session")
def trig():
    return make_trig_map(2, [0.5])


@pytest.fixture(scope="session")
def conj_pair():
    g = doubling()
    return conjugate_map(g, 0.2), g


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def h0(x, a=0.2):
    return x + a * np.sin(2 * np.pi * x) / (2 * np.pi)


def h0_prime(x, a=0.2):
    return 1 + a * np.cos(2 * np.pi * x)
