"""
Tests for exact lattice arithmetic: primitive vectors, lattice indices,
unimodular completions, cone multiplicities and Hilbert bases.
"""

import random
from fractions import Fraction

import pytest

from app.services.exact_lattice import (
    PointedCone,
    cone2_multiplicity,
    cone_inequalities,
    cross,
    det,
    group_by_span,
    hilbert_basis,
    lattice_index,
    pairing,
    plane_lattice_basis,
    primitive_direction,
    primitive_part,
    solve,
    transpose,
    unimodular_completion,
)


# ============================================================================
# PRIMITIVE VECTORS
# ============================================================================


@pytest.mark.lattice
def test_primitive_part_splits_factor() -> None:
    assert primitive_part((4, -6, 2)) == ((2, -3, 1), 2)
    assert primitive_part((0, 0, -5)) == ((0, 0, -1), 5)


@pytest.mark.lattice
def test_primitive_part_rejects_zero() -> None:
    with pytest.raises(ValueError, match="zero has no primitive part"):
        primitive_part((0, 0, 0))


@pytest.mark.lattice
def test_primitive_direction_of_rational_vector() -> None:
    assert primitive_direction((Fraction(1, 2), Fraction(1, 3), 0)) == (3, 2, 0)


@pytest.mark.lattice
def test_group_by_span() -> None:
    groups = group_by_span([(2, 0, 0), (1, 0, 0), (0, 3, 3)])
    assert groups == {(1, 0, 0): [(2, 0, 0), (1, 0, 0)], (0, 1, 1): [(0, 3, 3)]}


# ============================================================================
# LINEAR ALGEBRA
# ============================================================================


@pytest.mark.lattice
def test_solve_exact_and_singular() -> None:
    assert solve([[1, 2], [3, 4]], [5, 6]) == (Fraction(-4), Fraction(9, 2))
    assert solve([[1, 2], [2, 4]], [1, 2]) is None


@pytest.mark.lattice
@pytest.mark.parametrize("row", [(2, 3, 5), (1, 0, 0), (0, -1, 0), (6, 10, 15), (-4, 7, 0)])
def test_unimodular_completion(row) -> None:
    """
    Verifies:
    - row · V = e1
    - V is unimodular
    """
    v = unimodular_completion(row)
    columns = transpose(v)
    assert [pairing(row, c) for c in columns] == [1, 0, 0]
    assert abs(det(v)) == 1


@pytest.mark.lattice
def test_unimodular_completion_rejects_imprimitive_row() -> None:
    with pytest.raises(ValueError):
        unimodular_completion((2, 4, 6))


@pytest.mark.lattice
def test_lattice_index() -> None:
    assert lattice_index([(2, 0, 0), (0, 1, 0)]) == 2
    assert lattice_index([(1, 1, 0), (1, -1, 0)]) == 2
    assert lattice_index([(1, 0, 0), (0, 1, 0), (0, 0, 1)]) == 1
    assert lattice_index([(1, 0, 0), (0, 1, 0), (1, 1, 2)]) == 2


# ============================================================================
# CONES
# ============================================================================


@pytest.mark.lattice
def test_cone2_multiplicity() -> None:
    assert cone2_multiplicity((1, 0, 0), (0, 1, 0)) == 1
    assert cone2_multiplicity((1, 0, 0), (1, 2, 0)) == 2
    assert cone2_multiplicity((1, 0, 0), (1, 3, 0)) == 3
    # the plane lattice, not Z^3, sets the index
    assert cone2_multiplicity((1, 1, 0), (1, -1, 0)) == 2
    assert cone2_multiplicity((1, 0, 1), (0, 1, 1)) == 1
    # the coarse-fan 2-cone of the E6 row carries the residual A2
    assert cone2_multiplicity((-1, 3, 1), (2, -3, 1)) == 3


@pytest.mark.lattice
def test_cone2_multiplicity_rejects_parallel_rays() -> None:
    with pytest.raises(ValueError, match="degenerate cone"):
        cone2_multiplicity((1, 2, 3), (2, 4, 6))


@pytest.mark.lattice
def test_cone2_multiplicity_matches_determinant_oracle() -> None:
    """
    Random rays in the plane z = 0 against the determinant.

    For primitive u, v in Z^2 the multiplicity is |det(u, v)|.
    """
    rng = random.Random(7)
    checked = 0
    while checked < 200:
        u = (rng.randint(-6, 6), rng.randint(-6, 6), 0)
        v = (rng.randint(-6, 6), rng.randint(-6, 6), 0)
        if not any(u) or not any(v) or not any(cross(u, v)):
            continue
        u, v = primitive_part(u)[0], primitive_part(v)[0]
        if not any(cross(u, v)):
            continue
        assert cone2_multiplicity(u, v) == abs(u[0] * v[1] - u[1] * v[0])
        checked += 1


@pytest.mark.lattice
def test_plane_lattice_basis_spans_rays() -> None:
    b1, b2 = plane_lattice_basis((1, 1, 0), (1, -1, 0))
    assert abs(cross(b1, b2)[2]) == 1


@pytest.mark.lattice
def test_hilbert_basis_of_plane_cone() -> None:
    assert hilbert_basis([(1, 0, 0), (1, 2, 0)]) == ((1, 0, 0), (1, 1, 0), (1, 2, 0))


@pytest.mark.lattice
def test_hilbert_basis_of_simplicial_cone() -> None:
    basis = hilbert_basis([(1, 0, 0), (0, 1, 0), (1, 1, 2)])
    assert basis == ((0, 1, 0), (1, 0, 0), (1, 1, 1), (1, 1, 2))


@pytest.mark.lattice
def test_hilbert_basis_elements_generate_small_points() -> None:
    """
    Verifies:
    - every Hilbert basis element lies in the cone
    - small lattice points of the cone decompose over the basis
    """
    cone = PointedCone([(1, 0, 0), (0, 1, 0), (1, 1, 3)])
    basis = cone.hilbert_basis()
    assert all(cone.contains(h) for h in basis)
    reachable = {(0, 0, 0)}
    for _ in range(4):
        reachable |= {tuple(a + b for a, b in zip(r, h)) for r in reachable for h in basis}
    for x in range(3):
        for y in range(3):
            for z in range(4):
                p = (x, y, z)
                if cone.contains(p) and sum(p) <= 3:
                    assert p in reachable, f"{p} not generated by {basis}"


@pytest.mark.lattice
def test_cone_inequalities_are_inward_facet_normals() -> None:
    normals = cone_inequalities([(1, 0, 0), (0, 1, 0), (1, 1, 2)])
    assert normals == ((0, 0, 1), (0, 2, -1), (2, 0, -1))
    assert cone_inequalities([(1, 0, 0), (0, 1, 0), (0, 0, 1)]) == ((0, 0, 1), (0, 1, 0), (1, 0, 0))


@pytest.mark.lattice
def test_cone_with_line_is_rejected() -> None:
    with pytest.raises(ValueError, match="cone contains a line"):
        hilbert_basis([(1, 0, 0), (-1, 0, 0)])


@pytest.mark.lattice
def test_pointed_cone_strict_containment() -> None:
    cone = PointedCone([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert cone.contains((1, 1, 1), strict=True)
    assert cone.contains((1, 1, 0))
    assert not cone.contains((1, 1, 0), strict=True)
    assert cone.multiplicity() == 1
