import numpy as np
import pytest
from hypothesis import settings

from advstress.distributions import LifetimeModel, SupportGrid

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# Acceptance results, filled in by test_acceptance.py and reported at the end.
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def random_model(rng: np.random.Generator, m: int, zeros: bool = False) -> LifetimeModel:
    pmf = rng.dirichlet(np.ones(m))
    if zeros and m > 2:
        pmf[rng.integers(m)] = 0.0
        pmf /= pmf.sum()
    return LifetimeModel(SupportGrid(np.arange(1.0, m + 1)), pmf)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def two_point():
    return LifetimeModel(SupportGrid([1.0, 2.0]), [0.5, 0.5])


@pytest.fixture
def three_point():
    return LifetimeModel(SupportGrid([1.0, 2.0, 3.0]), [0.2, 0.3, 0.5])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, title = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}: {title}")
