"""
Tests for the Fine interior, its certificate, the support set and the
canonical closure.
"""

import random
from fractions import Fraction

import pytest

from app.services.atlas_service import random_canonical_fano
from app.services.fine_interior import (
    canonical_closure,
    certificate,
    fine_interior,
    fine_interior_result,
    is_canonically_closed,
    ord,
    support_set,
    verify_certificate,
)
from app.services.polytope import (
    contains,
    convex_hull,
    denominator_index,
    dilate,
    minkowski_sum,
    translate,
)


# ============================================================================
# REFLEXIVE AND EMPTY CASES
# ============================================================================


@pytest.mark.fine_interior
def test_fine_interior_of_reflexive_polytope_is_a_point(octahedron, cube) -> None:
    assert fine_interior(octahedron).vertices == ((0, 0, 0),)
    assert fine_interior(cube).vertices == ((0, 0, 0),)


@pytest.mark.fine_interior
def test_fine_interior_of_simplex_is_empty(simplex) -> None:
    """
    Verifies:
    - the unit simplex has an empty Fine interior
    - the support set is then undefined
    """
    result = fine_interior_result(simplex)
    assert result.is_empty
    assert result.certificate == ()
    with pytest.raises(ValueError, match="support undefined"):
        support_set(simplex)


@pytest.mark.fine_interior
def test_fine_interior_rejects_rational_input(simplex) -> None:
    with pytest.raises(ValueError, match="lattice polytope"):
        fine_interior(translate(simplex, (Fraction(1, 2), 0, 0)))


@pytest.mark.fine_interior
def test_ord_is_the_minimum(octahedron) -> None:
    assert ord(octahedron, (1, 1, 1)) == -1
    assert ord(octahedron, (2, 0, 0)) == -2


@pytest.mark.fine_interior
def test_support_set_of_octahedron(octahedron) -> None:
    """
    With F = {0} the support is every ν with ord = -1, i.e. the 26 nonzero
    vectors of {-1, 0, 1}^3.
    """
    support = support_set(octahedron)
    expected = sorted(
        (x, y, z) for x in (-1, 0, 1) for y in (-1, 0, 1) for z in (-1, 0, 1) if (x, y, z) != (0, 0, 0)
    )
    assert list(support) == expected
    assert (1, 1, 1) in support
    assert (2, 0, 0) not in support


@pytest.mark.fine_interior
def test_reflexive_polytopes_are_canonically_closed(octahedron, cube) -> None:
    assert canonical_closure(octahedron) == octahedron
    assert is_canonically_closed(cube)


@pytest.mark.fine_interior
def test_certificate_verifies(octahedron) -> None:
    assert verify_certificate(octahedron, fine_interior(octahedron))
    assert all(cone.holds() for cone in certificate(octahedron))


@pytest.mark.fine_interior
def test_wrong_candidate_fails_certificate(octahedron) -> None:
    wrong = convex_hull([(0, 0, 0), (1, 0, 0)])
    assert not verify_certificate(octahedron, wrong)


# ============================================================================
# ATLAS POLYTOPES
# ============================================================================


@pytest.mark.fine_interior
@pytest.mark.atlas
def test_maximal_polytopes_have_reference_fine_interior(atlas) -> None:
    """
    Verifies:
    - F(Δ_max) matches the stored Fine interior of each Kanev class
    - the Fine interior needs denominators 6
    """
    for label in ("a", "b"):
        data = atlas.classes[label]
        inner = fine_interior(atlas.maximal(label).polytope)
        assert inner == data.fine_interior, f"class {label}: {inner}"
        assert denominator_index(inner) == 6


@pytest.mark.fine_interior
@pytest.mark.atlas
def test_maximal_certificate_verifies(maximal_a) -> None:
    inner = fine_interior(maximal_a)
    assert verify_certificate(maximal_a, inner)
    assert len(support_set(maximal_a)) > 0


@pytest.mark.fine_interior
@pytest.mark.atlas
def test_closure_of_arrow_row_is_its_parent(atlas) -> None:
    entry = atlas.get("545932")
    assert entry.closure == "474457"
    closure = canonical_closure(entry.polytope)
    assert closure == atlas.get("474457").polytope
    assert fine_interior(closure) == fine_interior(entry.polytope)
    assert canonical_closure(closure) == closure
    assert not is_canonically_closed(entry.polytope)


@pytest.mark.fine_interior
@pytest.mark.atlas
def test_closed_maximal_rows(atlas) -> None:
    for label in ("a", "b"):
        assert is_canonically_closed(atlas.maximal(label).polytope)


# ============================================================================
# MONOTONICITY AND MINKOWSKI SUMS
# ============================================================================


@pytest.mark.fine_interior
def test_fine_interior_is_monotone(octahedron, cube) -> None:
    """
    Verifies:
    - Δ ⊆ Δ' implies F(Δ) ⊆ F(Δ')
    """
    pairs = [(octahedron, cube), (octahedron, dilate(octahedron, 2)), (cube, dilate(cube, 2))]
    for small, big in pairs:
        assert contains(big, small)
        assert contains(fine_interior(big), fine_interior(small))


@pytest.mark.fine_interior
@pytest.mark.atlas
@pytest.mark.parametrize("label", ["a", "b"])
def test_fine_interior_is_monotone_inside_a_class(atlas, label) -> None:
    maximal = atlas.maximal(label).polytope
    for entry_id in atlas.classes[label].minimal:
        small = atlas.get(entry_id).polytope
        assert contains(maximal, small), entry_id
        assert contains(fine_interior(maximal), fine_interior(small)), entry_id


@pytest.mark.fine_interior
def test_fine_interior_is_monotone_on_random_samples(rng) -> None:
    for i in range(3):
        small = random_canonical_fano(rng)
        big = convex_hull(list(small.vertices) + [tuple(2 * c for c in v) for v in small.vertices])
        assert contains(fine_interior(big), fine_interior(small)), f"sample {i}"


@pytest.mark.fine_interior
def test_fine_interior_of_minkowski_sum(octahedron, cube) -> None:
    """
    Verifies:
    - F(P) + F(Q) ⊆ F(P + Q)
    - the sum of two reflexive polytopes keeps a Fine interior around the origin
    """
    total = fine_interior(minkowski_sum(octahedron, cube))
    assert contains(total, minkowski_sum(fine_interior(octahedron), fine_interior(cube)))
    assert total.contains_point((0, 0, 0))


@pytest.mark.fine_interior
@pytest.mark.slow
def test_fine_interior_of_minkowski_sum_on_random_pairs() -> None:
    rng = random.Random(4242)
    for i in range(10):
        p, q = random_canonical_fano(rng), random_canonical_fano(rng)
        inner = minkowski_sum(fine_interior(p), fine_interior(q))
        assert contains(fine_interior(minkowski_sum(p, q)), inner), f"pair {i}"
