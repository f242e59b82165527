"""
Tests for hypersurface invariants and singularities, checked against
reference polytopes and individual atlas rows.
"""

import pytest

from app.services.fans import is_q_cartier, normal_fan
from app.services.fine_interior import canonical_closure
from app.services.hypersurface import (
    LITERATURE_CONSTANTS,
    adjoint_divisor,
    adjoint_facet,
    adjoint_polytope,
    ambient_singularities,
    canonical_model_singularities,
    fixed_point_dynkin,
    generic_picard,
    invariants,
    orbit_intersection_count,
    plurigenera_formula,
    residual_singularities,
    rho_is_isomorphism,
    singularity_report,
)
from app.services.polytope import minimizing_face, num_interior_points
from app.utils.ade_labels import format_labels, label_counts, total_rank


# ============================================================================
# INVARIANTS
# ============================================================================


@pytest.mark.hypersurface
def test_plurigenera_formula() -> None:
    assert plurigenera_formula(2, 1, 2) == 3
    assert plurigenera_formula(2, 1, 3) == 5
    assert plurigenera_formula(2, 2, 3) == 8


@pytest.mark.hypersurface
def test_invariants_of_kanev_maximal(maximal_a) -> None:
    """
    Verifies:
    - p_g = 1, q = 0, general type
    - K² = 1 and the canonical index is 6
    - sections of nF for n = 1..3 are 1, 3, 5
    """
    inv = invariants(maximal_a)
    assert (inv.p_g, inv.q, inv.kappa, inv.chi) == (1, 0, 2, 2)
    assert inv.K2 == 1
    assert inv.index_m == 6
    assert inv.plurigenera == (1, 3, 5)


@pytest.mark.hypersurface
@pytest.mark.parametrize("label", ["c", "d", "e"])
def test_invariants_of_todorov_classes(atlas, label) -> None:
    inv = invariants(atlas.maximal(label).polytope)
    assert inv.K2 == 2
    assert inv.index_m == 4
    assert inv.plurigenera == (1, 4, 8)


@pytest.mark.hypersurface
def test_invariants_of_reflexive_polytope(octahedron) -> None:
    inv = invariants(octahedron)
    assert inv.p_g == 1
    assert inv.kappa == 0
    assert inv.K2 is None
    assert inv.index_m == 1
    assert inv.plurigenera == (1, 1, 1)


@pytest.mark.hypersurface
def test_invariants_with_empty_fine_interior(simplex) -> None:
    inv = invariants(simplex)
    assert inv.p_g == 0
    assert inv.kappa == -1
    assert inv.index_m is None
    assert inv.plurigenera == ()


@pytest.mark.hypersurface
def test_adjoint_facet(maximal_a, octahedron) -> None:
    assert adjoint_facet(octahedron) is None
    facet = adjoint_facet(maximal_a)
    assert facet is not None
    assert num_interior_points(adjoint_polytope(maximal_a)) == 2


@pytest.mark.hypersurface
def test_literature_constants_cover_both_cases() -> None:
    assert LITERATURE_CONSTANTS[1]["pi1"] == "0"
    assert LITERATURE_CONSTANTS[2]["pi1"] == "Z/2"


# ============================================================================
# SINGULARITIES
# ============================================================================


@pytest.mark.hypersurface
@pytest.mark.atlas
@pytest.mark.parametrize(
    "entry_id, ambient, canonical, picard",
    [
        ("534866", "3A2+A1", "E6+A2", 9),
        ("499291", "A3+2A1", "D7", 8),
        ("547444", "3A2", "3A2", 7),
        ("545317", "3A1", "3A1", 4),
    ],
)
def test_singularities_of_atlas_rows(atlas, entry_id, ambient, canonical, picard) -> None:
    delta = atlas.get(entry_id).polytope
    found_ambient = [label for label, k in ambient_singularities(delta).items() for _ in range(k)]
    assert format_labels(found_ambient) == ambient, f"{entry_id} ambient"
    assert format_labels(canonical_model_singularities(delta)) == canonical, f"{entry_id} canonical"
    assert generic_picard(delta) == picard


@pytest.mark.hypersurface
@pytest.mark.atlas
def test_rank_accounting_on_e6_row(atlas) -> None:
    """
    Verifies:
    - the fixed-point graph has only simple edges
    - Picard - 1 is the node count plus the residual rank
    """
    delta = atlas.get("534866").polytope
    graph = fixed_point_dynkin(delta)
    assert graph.flagged_edges == []
    assert "E6" in graph.labels()
    report = singularity_report(delta)
    assert report.picard_generic - 1 == graph.graph.number_of_nodes() + total_rank(residual_singularities(delta))
    assert label_counts(report.canonical_rdp) == {"E6": 1, "A2": 1}


@pytest.mark.hypersurface
@pytest.mark.atlas
@pytest.mark.parametrize(
    "entry_id, dynkin",
    [
        ("534866", ["E6"]),
        ("499291", ["D7"]),
        ("547525", ["A8"]),
        ("547444", []),
        ("c", []),
        ("d", []),
        ("e", []),
    ],
)
def test_fixed_point_dynkin_labels(atlas, entry_id, dynkin) -> None:
    """
    Verifies:
    - the fixed-point graph has exactly the listed components
    - every node is minimized on a face of positive dimension
    """
    delta = atlas.get(entry_id).polytope
    graph = fixed_point_dynkin(delta)
    assert graph.labels() == dynkin, f"{entry_id}: {graph.labels()}"
    closure = canonical_closure(delta)
    for node in graph.graph.nodes:
        assert minimizing_face(closure, [node]).dim >= 1, f"{node} is minimized at a vertex"


@pytest.mark.hypersurface
@pytest.mark.atlas
@pytest.mark.parametrize(
    "entry_id, canonical, picard",
    [("c", {"A3": 2}, 7), ("d", {"A1": 4}, 5), ("e", {"A2": 2}, 5)],
)
def test_singularities_of_todorov_classes(atlas, entry_id, canonical, picard) -> None:
    delta = atlas.get(entry_id).polytope
    assert label_counts(canonical_model_singularities(delta)) == canonical
    assert generic_picard(delta) == picard


@pytest.mark.hypersurface
@pytest.mark.atlas
def test_minimizing_edge_of_e6_row(atlas) -> None:
    """
    Verifies:
    - the normals (-1,3,1) and (2,-3,1) are jointly minimized on the edge a a1
    - that edge has lattice length 1
    """
    delta = atlas.get("534866").polytope
    tau = [(-1, 3, 1), (2, -3, 1)]
    face = minimizing_face(delta, tau)
    assert set(face.vertices) == {(2, 1, -2), (0, 0, -1)}
    assert orbit_intersection_count(delta, tau) == 1


# ============================================================================
# ADJOINT FACET OF ROWS THAT ARE NOT CANONICALLY CLOSED
# ============================================================================


@pytest.mark.hypersurface
@pytest.mark.atlas
def test_adjoint_facet_of_arrow_row_comes_from_closure(atlas) -> None:
    """
    Verifies:
    - a row that is not canonically closed still has K² = 1
    - its adjoint facet and Δ_can are those of the closure
    - D_can on its own fan is refused, the row having no single far facet
    """
    delta = atlas.get("545932").polytope
    closure = canonical_closure(delta)
    assert closure != delta
    assert adjoint_facet(delta) == adjoint_facet(closure)
    assert num_interior_points(adjoint_polytope(delta)) == 2
    inv = invariants(delta)
    assert inv.K2 == 1
    assert inv.plurigenera == (1, 3, 5)
    with pytest.raises(ValueError, match="no adjoint facet"):
        adjoint_divisor(delta)


@pytest.mark.hypersurface
@pytest.mark.atlas
@pytest.mark.parametrize("entry_id", ["545932", "547524", "538356"])
def test_adjoint_consistency_on_arrow_rows(atlas, entry_id) -> None:
    delta = atlas.get(entry_id).polytope
    inv = invariants(delta)
    assert inv.p_g == 1
    assert num_interior_points(adjoint_polytope(delta)) == inv.K2 + 1 == 2


@pytest.mark.hypersurface
@pytest.mark.atlas
def test_rho_isomorphism_follows_q_cartier(atlas) -> None:
    """
    Verifies:
    - maximal and E6 rows have a Q-Cartier D_can
    - closed rows missing one of a1, b1, d1 do not
    - the criterion is exactly Q-Cartierness of D_can on the normal fan
    """
    for entry_id, expected in [("547444", True), ("534866", True), ("534669", False), ("537834", False)]:
        delta = atlas.get(entry_id).polytope
        assert rho_is_isomorphism(delta) is expected, entry_id
        assert (is_q_cartier(adjoint_divisor(delta), normal_fan(delta)) is not None) is expected


@pytest.mark.hypersurface
@pytest.mark.atlas
def test_rho_criterion_rejects_todorov_class(atlas) -> None:
    with pytest.raises(ValueError, match="rho criterion"):
        rho_is_isomorphism(atlas.maximal("c").polytope)
