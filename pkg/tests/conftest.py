from __future__ import annotations

import random

import pytest

from pqncheck.models import canonical_nijenhuis, canonical_poisson
from pqncheck.scalar import Chart, ScalarField


def fd_partial(field: ScalarField, point, index: int, h: float = 1e-5) -> float:
    """Central finite difference, the derivative oracle independent of the symbolic path."""
    up = list(point)
    dn = list(point)
    up[index] += h
    dn[index] -= h
    return (field.evaluate(up) - field.evaluate(dn)) / (2 * h)


def seeded(seed: int = 20240) -> random.Random:
    return random.Random(seed)


@pytest.fixture(scope="session")
def chart2() -> Chart:
    return Chart(2)


@pytest.fixture(scope="session")
def chart3() -> Chart:
    return Chart(3)


@pytest.fixture(scope="session")
def canonical2(chart2):
    return canonical_poisson(chart2), canonical_nijenhuis(chart2)


@pytest.fixture(scope="session")
def canonical3(chart3):
    return canonical_poisson(chart3), canonical_nijenhuis(chart3)
