from __future__ import annotations

import pytest

from kdc import build_problem


@pytest.fixture(scope="session")
def default_problem():
    """The standard benchmark problem used across the suite."""
    return build_problem(dim=200, gamma=1.0, zeta=0.5, source_norm=1.0, noise_sd=0.3)


@pytest.fixture(scope="session")
def small_problem():
    """A 20-mode problem small enough for exhaustive checks."""
    return build_problem(dim=20, gamma=1.0, zeta=0.5, source_norm=1.0, noise_sd=0.1)


@pytest.fixture(scope="session")
def noiseless_small_problem():
    return build_problem(dim=20, gamma=1.0, zeta=0.5, source_norm=1.0, noise_sd=0.0)
