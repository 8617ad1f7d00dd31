import functools

import pytest

from clampedplate.grid import Domain, build_grid
from clampedplate.study import solve_grid

DOMAINS = {
    "beam": Domain.interval(),
    "square": Domain.box([1.0, 1.0]),
    "disk": Domain.disk(),
}


@functools.lru_cache(maxsize=None)
def spectrum(kind: str, divisions: int, K: int, method: str = "auto"):
    grid = build_grid(DOMAINS[kind], divisions)
    return solve_grid(grid, K, method)


@pytest.fixture(scope="session")
def get_spectrum():
    return spectrum
