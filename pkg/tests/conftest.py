"""
Pytest configuration and fixtures for the XX-chain entanglement engine tests.
"""

import os
import tempfile
from typing import Generator

import numpy as np
import pytest

from chain import ChainSpec


@pytest.fixture
def tmp_output_path() -> Generator[str, None, None]:
    """
    Create a temporary output file path (the file itself is removed first).

    Yields:
        Path to a not-yet-existing output file
    """
    fd, path = tempfile.mkstemp(suffix='.csv')
    os.close(fd)
    os.unlink(path)
    yield path
    # Cleanup
    if os.path.exists(path):
        os.unlink(path)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded random generator for reproducible random grids."""
    return np.random.default_rng(20240917)


@pytest.fixture
def ferro_ring() -> ChainSpec:
    """Small even ring with ferromagnetic coupling."""
    return ChainSpec(n=6, v=1.0, b=0.4)


@pytest.fixture
def odd_af_ring() -> ChainSpec:
    """Small odd ring with antiferromagnetic coupling."""
    return ChainSpec(n=5, v=-1.0, b=0.3)


@pytest.fixture
def random_x_state(rng):
    """
    Factory of random valid X-state elements (p_plus, p, p_minus, alpha).

    Returns:
        Callable drawing one tuple per call
    """
    def draw():
        weights = rng.dirichlet(np.ones(3))
        p_plus, p_minus = weights[0], weights[2]
        p = weights[1] / 2.0
        alpha = rng.uniform(-p, p)
        return p_plus, p, p_minus, alpha

    return draw


@pytest.fixture(autouse=True)
def mock_env_vars(monkeypatch):
    """
    Mock environment variables for testing.

    Args:
        monkeypatch: Pytest monkeypatch fixture
    """
    monkeypatch.setenv("LOG_LEVEL", "ERROR")  # Reduce log noise in tests
    monkeypatch.setenv("LOG_TO_CONSOLE", "false")
