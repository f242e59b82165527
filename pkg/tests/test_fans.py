"""
Tests for normal fans, refinements, Reid's criterion, torus divisors and
the crepancy check.
"""

import pytest

from app.services.fans import (
    Cone,
    TorusDivisor,
    canonical_divisor,
    common_refinement,
    crepancy_check,
    crepant_refinement_of,
    crepant_simplicial_refinement,
    cone_is_canonical,
    cone_is_terminal,
    cone_multiplicity,
    delta_tilde,
    divisor_from_ord,
    fan_to_dot,
    fan_to_json,
    is_basepointfree,
    is_q_cartier,
    normal_fan,
    pulling_triangulation,
    refines,
    reid_witness,
    self_intersection_top,
)
from app.services.fine_interior import support_set
from app.services.hypersurface import adjoint_divisor
from app.services.polytope import convex_hull


# ============================================================================
# NORMAL FANS
# ============================================================================


@pytest.mark.fans
def test_normal_fan_of_octahedron(octahedron) -> None:
    """
    Verifies:
    - rays are the eight sign vectors
    - six non-simplicial maximal cones with twelve 2-cones
    """
    fan = normal_fan(octahedron)
    assert sorted(fan.rays) == sorted((x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1))
    assert len(fan.max_cones) == 6
    assert not fan.is_simplicial()
    assert len(fan.two_cones()) == 12
    assert fan.complete and fan.facets_pair_up()


@pytest.mark.fans
def test_normal_fan_of_cube_is_smooth(cube) -> None:
    fan = normal_fan(cube)
    assert len(fan.rays) == 6
    assert fan.is_simplicial()
    assert all(cone_multiplicity(c) == 1 for c in fan.cones())


@pytest.mark.fans
def test_normal_fan_rejects_flat_polytope() -> None:
    with pytest.raises(ValueError):
        normal_fan(convex_hull([(0, 0, 0), (1, 0, 0), (0, 1, 0)]))


@pytest.mark.fans
def test_common_refinement_refines_both(octahedron, cube) -> None:
    first, second = normal_fan(octahedron), normal_fan(cube)
    both = common_refinement(first, second)
    assert refines(both, first)
    assert refines(both, second)
    assert not refines(first, second)


@pytest.mark.fans
def test_delta_tilde_of_reflexive_polytope(octahedron) -> None:
    assert delta_tilde(octahedron) == octahedron


# ============================================================================
# REFINEMENTS AND REID'S CRITERION
# ============================================================================


@pytest.mark.fans
def test_pulling_triangulation_of_square_cone(octahedron) -> None:
    cone = normal_fan(octahedron).cone(0)
    simplices = pulling_triangulation(cone)
    assert len(simplices) == 2
    assert all(min(cone.rays) in s for s in simplices)


@pytest.mark.fans
def test_simplicial_refinement_keeps_rays(octahedron) -> None:
    fan = normal_fan(octahedron)
    refined = crepant_simplicial_refinement(fan, fan.rays)
    assert refined.is_simplicial()
    assert len(refined.max_cones) == 12
    assert refined.rays == fan.rays
    assert refines(refined, fan)


@pytest.mark.fans
def test_simplicial_refinement_needs_all_fan_rays(octahedron) -> None:
    fan = normal_fan(octahedron)
    with pytest.raises(ValueError, match="support incomplete"):
        crepant_simplicial_refinement(fan, fan.rays[1:])


@pytest.mark.fans
@pytest.mark.parametrize(
    "rays, canonical, terminal",
    [
        ([(1, 0, 0), (0, 1, 0), (0, 0, 1)], True, True),
        ([(1, 0, 0), (0, 1, 0), (1, 1, 2)], True, True),
        ([(1, 0, 0), (0, 1, 0), (-1, -1, 3)], True, False),
        ([(1, 0, 0), (0, 1, 0), (-1, -1, 5)], False, False),
    ],
)
def test_reid_criterion(rays, canonical, terminal) -> None:
    cone = Cone.from_generators(rays)
    assert cone_is_canonical(cone) is canonical
    assert cone_is_terminal(cone) is terminal


@pytest.mark.fans
def test_reid_witness_level() -> None:
    witness = reid_witness(Cone.from_generators([(1, 0, 0), (0, 1, 0), (1, 1, 2)]))
    assert witness is not None
    assert witness[1] == 2
    assert cone_multiplicity(Cone.from_generators([(1, 0, 0), (0, 1, 0), (1, 1, 2)])) == 2


# ============================================================================
# DIVISORS
# ============================================================================


@pytest.mark.fans
def test_anticanonical_divisor_of_octahedron(octahedron) -> None:
    """
    Verifies:
    - K is Cartier on the octahedron fan
    - -K = D_octahedron is basepointfree
    """
    fan = normal_fan(octahedron)
    k = canonical_divisor(fan)
    assert is_q_cartier(k, fan) == 1
    anti = divisor_from_ord(octahedron, fan)
    assert anti == k.scale(-1)
    assert is_basepointfree(anti, fan)


@pytest.mark.fans
def test_basepointfree_needs_cartier(octahedron) -> None:
    fan = normal_fan(octahedron)
    lopsided = TorusDivisor(fan.rays, (1,) + (0,) * (len(fan.rays) - 1))
    assert is_q_cartier(lopsided, fan) is None
    with pytest.raises(ValueError, match="not Cartier"):
        is_basepointfree(lopsided, fan)


@pytest.mark.fans
def test_self_intersection_top(octahedron, cube) -> None:
    assert self_intersection_top(octahedron) == 8
    assert self_intersection_top(cube) == 48


@pytest.mark.fans
@pytest.mark.atlas
def test_adjoint_divisor_q_cartier_matches_atlas(atlas) -> None:
    maximal = atlas.get("547444").polytope
    assert is_q_cartier(adjoint_divisor(maximal), normal_fan(maximal)) == 6
    other = atlas.get("534669").polytope
    assert is_q_cartier(adjoint_divisor(other), normal_fan(other)) is None


# ============================================================================
# CREPANCY AND EXPORT
# ============================================================================


@pytest.mark.fans
@pytest.mark.atlas
def test_crepancy_on_maximal_polytope(maximal_a) -> None:
    assert crepancy_check(maximal_a)
    refined = crepant_refinement_of(maximal_a)
    assert refined.is_simplicial()
    assert set(refined.rays) == set(support_set(maximal_a).rays)


@pytest.mark.fans
@pytest.mark.atlas
def test_crepancy_check_rejects_unclosed_polytope(atlas) -> None:
    with pytest.raises(ValueError, match="canonically closed"):
        crepancy_check(atlas.get("545932").polytope)


@pytest.mark.fans
def test_fan_exports(cube) -> None:
    fan = normal_fan(cube)
    data = fan_to_json(fan)
    assert len(data["rays"]) == 6
    assert len(data["max_cones"]) == 8
    dot = fan_to_dot(fan, name="cube")
    assert dot.startswith("graph cube {")
    assert dot.count(" -- ") == 12
    assert dot.endswith("}\n")
