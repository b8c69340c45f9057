import numpy as np
import pytest

from blaschke_lab import BlaschkeProduct


def random_blaschke(rng: np.random.Generator, max_degree: int = 4, max_radius: float = 0.8) -> BlaschkeProduct:
    d = int(rng.integers(1, max_degree + 1))
    r = max_radius * np.sqrt(rng.uniform(0, 1, d))
    zeros = r * np.exp(1j * rng.uniform(0, 2 * np.pi, d))
    return BlaschkeProduct.from_zeros(zeros)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def B_default():
    return BlaschkeProduct.from_zeros([0, 0.5])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
