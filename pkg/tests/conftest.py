"""Pytest configuration and fixtures."""

import numpy as np
import pytest
import structlog

from karcher.models.matrix import SpdMatrix
from karcher.models.measure import DiscreteMeasure
from karcher.schemas.solver import SolverConfig
from karcher.services.lln_service import random_measure, random_spd


@pytest.fixture(autouse=True)
def reset_logging():
    """Restore default structlog output after each test."""
    yield
    structlog.reset_defaults()


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for testing."""
    return np.random.default_rng(20240611)


@pytest.fixture
def make_spd(rng):
    """Sample SPD matrix factory for testing."""

    def factory(n: int = 3, spread: float = 0.5) -> SpdMatrix:
        return random_spd(rng, n, spread)

    return factory


@pytest.fixture
def make_measure(rng):
    """Sample measure factory for testing."""

    def factory(
        n: int = 3, k: int = 3, spread: float = 0.5, uniform: bool = False
    ) -> DiscreteMeasure:
        return random_measure(rng, n, k, spread, uniform=uniform)

    return factory


@pytest.fixture
def precise_config() -> SolverConfig:
    """Sample tight solver config for testing."""
    return SolverConfig(tol=1e-12, max_iter=20_000)


@pytest.fixture
def two_atoms() -> tuple[SpdMatrix, SpdMatrix]:
    """Sample pair of non-commuting atoms for testing."""
    a = SpdMatrix([[2.0, 0.5], [0.5, 1.0]])
    b = SpdMatrix([[1.0, -0.3], [-0.3, 3.0]])
    return a, b
