"""Shared fixtures: canonical bodies reused across the suite."""

from __future__ import annotations

import numpy as np
import pytest

from dropletlab.shapes import Ball, Ellipsoid, StarShape, TwoBalls, cube_mesh, icosphere


@pytest.fixture(scope="session")
def unit_ball():
    return Ball(1.0)


@pytest.fixture(scope="session")
def prolate():
    return Ellipsoid((1.0, 1.0, 2.0))


@pytest.fixture(scope="session")
def bumpy_star():
    return StarShape(1.0, {(2, 0): 0.1, (3, 1): 0.05, (4, 0): 0.02})


@pytest.fixture(scope="session")
def two_balls():
    return TwoBalls(1.0, 0.8, 3.0)


@pytest.fixture(scope="session")
def cube():
    return cube_mesh(1.0)


@pytest.fixture(scope="session")
def ball_mesh():
    return icosphere(1.0, subdivisions=3)


def random_rng(tag: int) -> np.random.Generator:
    """One fixed generator per call site; tests stay reproducible."""
    return np.random.default_rng(20_260_825 + tag)
