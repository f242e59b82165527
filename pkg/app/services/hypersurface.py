"""Invariants and singularities of the nondegenerate hypersurface of a lattice 3-tope."""

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from app.services.exact_lattice import NVector, cone2_multiplicity
from app.services.fans import (
    Cone,
    TorusDivisor,
    crepant_refinement_of,
    delta_tilde_fan,
    is_q_cartier,
    normal_fan,
)
from app.services.fine_interior import canonical_closure, fine_interior, support_set
from app.services.polytope import (
    HalfSpace,
    Polytope,
    convex_hull,
    denominator_index,
    dilate,
    face_lattice_length,
    interior_lattice_points,
    minimizing_face,
    num_interior_points,
    num_lattice_points,
    unique_interior_point,
)
from app.utils.ade_labels import a_label, classify_graph, sort_labels, total_rank

# Configure logger
logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

# Values quoted from the surface literature, never computed here.
LITERATURE_CONSTANTS: Dict[int, Dict[str, object]] = {
    1: {"h11": 19, "euler_number": 23, "pi1": "0", "abstract_generic_rho": 1},
    2: {"h11": 18, "euler_number": 22, "pi1": "Z/2", "abstract_generic_rho": 1},
}


# ============================================================================
# TYPES
# ============================================================================


@dataclass(frozen=True)
class HypersurfaceInvariants:
    """Numerical invariants of the minimal model of the hypersurface."""

    p_g: int
    q: int
    kappa: int
    K2: Optional[int]
    index_m: Optional[int]
    plurigenera: Tuple[int, ...]
    chi: int


@dataclass
class DynkinGraph:
    """Fixed-point graph: interior support rays joined along curves of the refinement."""

    graph: nx.Graph = field(default_factory=nx.Graph)
    flagged_edges: List[Tuple[NVector, NVector, int]] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return self.graph.number_of_nodes() == 0

    def labels(self) -> List[str]:
        if self.is_empty:
            return []
        return classify_graph(self.graph)

    def label(self) -> str:
        """Joined component labels, "" for the empty graph."""
        return "+".join(self.labels())


@dataclass
class SingularityReport:
    ambient: Dict[str, int]
    fixed_point: DynkinGraph
    canonical_rdp: List[str]
    picard_generic: int


# ============================================================================
# INVARIANTS
# ============================================================================


def _distance_two_facet(delta: Polytope) -> Optional[HalfSpace]:
    c = unique_interior_point(delta)
    if c is None:
        return None
    distances = [f.slack(c) for f in delta.facets]
    far = [f for f, d in zip(delta.facets, distances) if d == 2]
    if len(far) != 1 or any(d not in (1, 2) for d in distances):
        return None
    return far[0]


def adjoint_host(delta: Polytope) -> Tuple[Polytope, Optional[HalfSpace]]:
    """
    The polytope carrying the adjoint facet, with that facet.

    Δ itself when it has one; otherwise C(Δ), which shares the Fine interior
    and the interior point. The facet is None when neither has one.
    """
    facet = _distance_two_facet(delta)
    if facet is not None or unique_interior_point(delta) is None:
        return delta, facet
    closure = canonical_closure(delta)
    if closure == delta:
        return delta, None
    return closure, _distance_two_facet(closure)


def adjoint_facet(delta: Polytope) -> Optional[HalfSpace]:
    """
    The unique facet at lattice distance 2 from the interior point, all other
    facets being at distance 1; taken on C(Δ) when Δ is not canonically
    closed. None if there is no such facet.
    """
    return adjoint_host(delta)[1]


def facet_polytope(delta: Polytope, facet: HalfSpace) -> Polytope:
    return convex_hull(v for v in delta.vertices if facet.slack(v) == 0)


def adjoint_polytope(delta: Polytope) -> Optional[Polytope]:
    """Δ_can, the facet polytope of the adjoint facet."""
    host, facet = adjoint_host(delta)
    return None if facet is None else facet_polytope(host, facet)


def plurigenera_formula(chi: int, K2: int, n: int) -> int:
    """P_n = χ + n(n-1)/2 · K² for n >= 2."""
    return chi + n * (n - 1) * K2 // 2


def invariants(delta: Polytope) -> HypersurfaceInvariants:
    """
    p_g, q, Kodaira dimension, K², index m and section counts |nF ∩ M|.

    K² is absent when Δ has no adjoint facet; the other fields stay valid.
    """
    p_g = num_interior_points(delta)
    q = 0
    inner = fine_interior(delta)
    kappa = -1 if inner.is_empty else min(inner.dim, 2)
    can = adjoint_polytope(delta)
    K2 = None if can is None else num_interior_points(can) - 1
    if inner.is_empty:
        index_m, sections = None, ()
    else:
        index_m = denominator_index(inner)
        sections = tuple(num_lattice_points(dilate(inner, n)) for n in range(1, 4))
    return HypersurfaceInvariants(
        p_g=p_g, q=q, kappa=kappa, K2=K2, index_m=index_m, plurigenera=sections, chi=1 - q + p_g
    )


# ============================================================================
# SINGULARITIES
# ============================================================================


def orbit_intersection_count(delta: Polytope, tau: Sequence[NVector]) -> int:
    """Lattice length of the Δ-face minimizing τ's generators if it is an edge, else 0."""
    return face_lattice_length(minimizing_face(delta, tau))


def two_cone_singularities(delta: Polytope, two_cones) -> Counter:
    """A_{m-1} counts from 2-cones of multiplicity m > 1 with an edge as minimizing face of Δ."""
    found: Counter = Counter()
    for u, v in two_cones:
        m = cone2_multiplicity(u, v)
        if m <= 1:
            continue
        length = orbit_intersection_count(delta, (u, v))
        if length:
            found[a_label(m)] += length
    return found


def ambient_singularities(delta: Polytope) -> Dict[str, int]:
    """
    A_k points of the hypersurface in the toric variety of Σ_Δ̃.

    Each 2-cone of multiplicity m > 1 whose minimizing face of C(Δ) is an
    edge of lattice length l contributes l points of type A_{m-1}.
    """
    closure = canonical_closure(delta)
    found = two_cone_singularities(closure, delta_tilde_fan(closure).two_cones())
    return {label: found[label] for label in sort_labels(found)}


def fixed_point_dynkin(delta: Polytope) -> DynkinGraph:
    """
    Dynkin graph over the torus fixed point at the interior point of Δ.

    Nodes are the support rays strictly inside the normal cone σ of F(Δ) at
    that point whose minimizing face of C(Δ) has positive dimension; a ray
    minimized at a vertex carries no exceptional curve. Two nodes are joined
    when they span a 2-cone of the crepant refinement whose minimizing face
    of C(Δ) is an edge.
    """
    closure = canonical_closure(delta)
    inner = fine_interior(closure)
    c = unique_interior_point(closure)
    result = DynkinGraph()
    if c is None or inner.dim != 3 or tuple(c) not in inner.vertices:
        return result
    sigma = Cone.from_generators(f.normal for f in inner.tight_facets(c))
    nodes = [
        r
        for r in support_set(closure)
        if sigma.contains(r, strict=True) and minimizing_face(closure, [r]).dim >= 1
    ]
    result.graph.add_nodes_from(nodes)
    node_set = set(nodes)
    for u, v in crepant_refinement_of(closure).two_cones():
        if u not in node_set or v not in node_set:
            continue
        length = orbit_intersection_count(closure, (u, v))
        if length >= 1:
            result.graph.add_edge(u, v, length=length)
            if length > 1:
                logger.warning(f"Dynkin edge {u}-{v} has multiplicity {length}")
                result.flagged_edges.append((u, v, length))
    return result


def residual_singularities(delta: Polytope) -> List[str]:
    """A_{m-1} points from 2-cones of Σ_F whose minimizing face of C(Δ) is an edge."""
    closure = canonical_closure(delta)
    inner = fine_interior(closure)
    if inner.dim != 3:
        return []
    residual = two_cone_singularities(closure, normal_fan(inner).two_cones())
    return sort_labels(residual.elements())


def canonical_model_singularities(delta: Polytope) -> List[str]:
    """
    Rational double points of the canonical model: the residual points plus
    the components of the fixed-point Dynkin graph.
    """
    closure = canonical_closure(delta)
    return sort_labels(residual_singularities(closure) + fixed_point_dynkin(closure).labels())


def generic_picard(delta: Polytope) -> int:
    """1 + total rank of the canonical-model RDPs."""
    return 1 + total_rank(canonical_model_singularities(delta))


def singularity_report(delta: Polytope) -> SingularityReport:
    graph = fixed_point_dynkin(delta)
    rdp = canonical_model_singularities(delta)
    return SingularityReport(
        ambient=ambient_singularities(delta),
        fixed_point=graph,
        canonical_rdp=rdp,
        picard_generic=1 + total_rank(rdp),
    )


# ============================================================================
# ADJOINT DIVISOR
# ============================================================================


def adjoint_divisor(delta: Polytope) -> TorusDivisor:
    """
    D_can on Σ_Δ: coefficient 1 on the adjoint facet's ray, 0 elsewhere.

    Raises:
        ValueError: If Δ has no adjoint facet
    """
    facet = _distance_two_facet(delta)
    if facet is None:
        raise ValueError("polytope has no adjoint facet")
    fan = normal_fan(delta)
    return TorusDivisor(fan.rays, tuple(Fraction(1 if r == facet.normal else 0) for r in fan.rays))


def rho_is_isomorphism(delta: Polytope) -> bool:
    """
    Whether the toric morphism from P_Δ̃ to P_Δ is an isomorphism in codimension 1.

    True iff D_can is Q-Cartier on Σ_Δ.

    Raises:
        ValueError: If Δ_can does not have exactly two interior points
    """
    can = adjoint_polytope(delta)
    if can is None or len(interior_lattice_points(can)) != 2:
        raise ValueError("rho criterion applies to polytopes with l*(Δ_can) = 2 only")
    return is_q_cartier(adjoint_divisor(delta), normal_fan(delta)) is not None
