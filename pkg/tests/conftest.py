"""
Pytest configuration and shared fixtures.

This module provides reusable fixtures for:
- The loaded atlas and its class reference data
- Small reference polytopes (octahedron, cube, standard simplex)
- A seeded random generator

Usage:
    pytest -m "not slow" -v
"""

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from app.services.atlas_service import Atlas, load_atlas  # noqa: E402
from app.services.polytope import Polytope, convex_hull  # noqa: E402


# ============================================================================
# CONFIGURATION
# ============================================================================

OCTAHEDRON_VERTICES = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
CUBE_VERTICES = [(x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
SIMPLEX_VERTICES = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
KANEV_MAXIMAL_A = "547444"
KANEV_MAXIMAL_B = "545317"


# ============================================================================
# FIXTURES
# ============================================================================


@pytest.fixture(scope="session")
def atlas() -> Atlas:
    """
    The embedded atlas, loaded once per session.

    Returns:
        Atlas: 49 entries in table order
    """
    return load_atlas()


@pytest.fixture(scope="session")
def class_a(atlas: Atlas):
    return atlas.classes["a"]


@pytest.fixture(scope="session")
def class_b(atlas: Atlas):
    return atlas.classes["b"]


@pytest.fixture(scope="session")
def maximal_a(atlas: Atlas) -> Polytope:
    return atlas.get(KANEV_MAXIMAL_A).polytope


@pytest.fixture(scope="session")
def maximal_b(atlas: Atlas) -> Polytope:
    return atlas.get(KANEV_MAXIMAL_B).polytope


@pytest.fixture(scope="session")
def octahedron() -> Polytope:
    return convex_hull(OCTAHEDRON_VERTICES)


@pytest.fixture(scope="session")
def cube() -> Polytope:
    return convex_hull(CUBE_VERTICES)


@pytest.fixture(scope="session")
def simplex() -> Polytope:
    return convex_hull(SIMPLEX_VERTICES)


@pytest.fixture
def rng() -> random.Random:
    """Seeded generator; every test gets a fresh one."""
    return random.Random(0)
