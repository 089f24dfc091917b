import numpy as np
import pytest

from plasmonbie.geometry2d import make_disk, make_ellipse, make_fourier_star
from plasmonbie.spectral import boundary_spectrum

SHAPES = {
    "disk": lambda: make_disk(1.0),
    "ellipse": lambda: make_ellipse(2.0, 1.0),
    "star": lambda: make_fourier_star(cos=(0.0, 0.0, 0.2)),
}

_cache = {}


def spectrum(name, N):
    key = (name, N)
    if key not in _cache:
        _cache[key] = boundary_spectrum(SHAPES[name](), N)
    return _cache[key]


@pytest.fixture(scope="session")
def ellipse256():
    return spectrum("ellipse", 256)


@pytest.fixture(scope="session")
def ellipse128():
    return spectrum("ellipse", 128)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
