"""
Atlas of the 49 canonical Fano 3-topes whose hypersurfaces are Kanev surfaces
or surfaces of Todorov type.

Loads the embedded atlas data, classifies Fine interiors, verifies every
table row from its spanning set and implements the structural operations
(extremal polytopes, symmetry-plane splits, lattice coarsening and
refinement).
"""

import json
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from app.config import get_settings
from app.services.exact_lattice import (
    NVector,
    cross,
    pairing,
    primitive_direction,
    solve,
    to_ints,
    vadd,
    vscale,
    vsub,
)
from app.services.fans import (
    canonical_divisor,
    cone_is_terminal,
    crepancy_check,
    crepant_refinement_of,
    delta_tilde_fan,
    divisor_from_ord,
    is_basepointfree,
    is_q_cartier,
    normal_fan,
    self_intersection_top,
)
from app.services.fine_interior import (
    canonical_closure,
    fine_interior,
    is_canonically_closed,
    support_set,
)
from app.services.hypersurface import (
    adjoint_divisor,
    adjoint_polytope,
    ambient_singularities,
    canonical_model_singularities,
    facet_polytope,
    fixed_point_dynkin,
    invariants,
    plurigenera_formula,
    residual_singularities,
    rho_is_isomorphism,
    two_cone_singularities,
)
from app.services.polytope import (
    HalfSpace,
    Polytope,
    contains,
    convex_hull,
    dilate,
    from_halfspaces,
    is_canonical_fano,
    is_reflexive,
    lattice_isomorphic,
    lattice_points,
    minimizing_face,
    num_interior_points,
    num_lattice_points,
    translate,
)
from app.utils.ade_labels import format_labels, parse_labels, sort_labels, total_rank
from app.utils.rational_codec import parse_vector
from src.schemas.models import CheckResult

# Configure logger
logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

EXPECTED_CLASS_COUNTS: Dict[str, int] = {"a": 20, "b": 26, "c": 1, "d": 1, "e": 1}
KANEV_CLASSES = ("a", "b")
TODOROV_CLASSES = ("c", "d", "e")
MINIMAL_LATTICE_COUNTS: Dict[str, Tuple[int, ...]] = {"a": (11, 15, 11), "b": (13, 11, 11)}
CLOSED_COUNTS: Dict[str, int] = {"a": 11, "b": 15}
MAX_SAMPLER_ATTEMPTS = 5000


# ============================================================================
# ATLAS TYPES
# ============================================================================


@dataclass(frozen=True, eq=False)
class ClassData:
    """Reference data of one Fine-interior type: its Fine interior and named points."""

    label: str
    fine_interior: Polytope
    points: Dict[str, NVector]
    can: Tuple[str, ...]
    dilation: int
    maximal: str
    minimal: Tuple[str, ...]
    rho_condition: Tuple[str, ...]
    split: Tuple[str, str, str]
    dropped_by_coarsening: Optional[Tuple[str, ...]]

    def point(self, name: str) -> NVector:
        try:
            return self.points[name]
        except KeyError:
            raise KeyError(f"Class {self.label} has no point named {name!r}") from None

    def expand(self, names: Iterable[str]) -> List[NVector]:
        """Spanning names to points; "can" stands for the vertices of Δ_can."""
        result: List[NVector] = []
        for name in names:
            if name == "can":
                result.extend(self.point(n) for n in self.can)
            else:
                result.append(self.point(name))
        return result

    @property
    def adjoint_polytope(self) -> Polytope:
        return convex_hull(self.point(n) for n in self.can)


@dataclass(frozen=True)
class ExpectedColumns:
    lattice_points: Optional[int]
    ambient: Tuple[str, ...]
    canonical: Tuple[str, ...]
    picard: int
    q_cartier: Optional[bool]


@dataclass(frozen=True)
class AtlasEntry:
    """One table row: spanning set plus the expected data columns."""

    id: str
    fine_class: str
    span: Tuple[str, ...]
    points: Tuple[NVector, ...]
    expected: ExpectedColumns
    closure: Optional[str]

    @cached_property
    def polytope(self) -> Polytope:
        return convex_hull(self.points)

    @property
    def is_arrow(self) -> bool:
        """Rows whose canonical closure is another row."""
        return self.closure is not None

    def spanning_label(self) -> str:
        return ", ".join("Δ_can" if n == "can" else n for n in self.span)


@dataclass(frozen=True, eq=False)
class Atlas:
    classes: Dict[str, ClassData]
    entries: Tuple[AtlasEntry, ...]
    kanev_example: Tuple[NVector, ...]
    kanev_target: str

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, entry_id: str) -> AtlasEntry:
        """
        Look up an entry by id.

        Raises:
            KeyError: If the id is not in the atlas
        """
        for entry in self.entries:
            if entry.id == entry_id:
                return entry
        raise KeyError(f"Unknown atlas id: {entry_id}")

    def by_class(self, label: str) -> List[AtlasEntry]:
        return [e for e in self.entries if e.fine_class == label]

    def class_counts(self) -> Dict[str, int]:
        return {label: len(self.by_class(label)) for label in sorted(self.classes)}

    def maximal(self, label: str) -> AtlasEntry:
        return self.get(self.classes[label].maximal)


# ============================================================================
# LOADING
# ============================================================================


def _parse_class(label: str, raw: dict) -> ClassData:
    dropped = raw.get("dropped_by_coarsening")
    return ClassData(
        label=label,
        fine_interior=convex_hull(parse_vector(v) for v in raw["fine_interior"]),
        points={name: tuple(int(c) for c in v) for name, v in raw["points"].items()},
        can=tuple(raw["can"]),
        dilation=int(raw["dilation"]),
        maximal=str(raw["maximal"]),
        minimal=tuple(str(i) for i in raw["minimal"]),
        rho_condition=tuple(raw.get("rho_condition", ())),
        split=tuple(raw["split"]),
        dropped_by_coarsening=None if dropped is None else tuple(dropped),
    )


def _parse_entry(raw: dict, classes: Dict[str, ClassData]) -> AtlasEntry:
    label = raw["class"]
    if label not in classes:
        raise ValueError(f"Entry {raw.get('id')} has unknown class {label!r}")
    span = tuple(raw["span"])
    closure = raw.get("closure")
    return AtlasEntry(
        id=str(raw["id"]),
        fine_class=label,
        span=span,
        points=tuple(classes[label].expand(span)),
        expected=ExpectedColumns(
            lattice_points=raw.get("lattice_points"),
            ambient=tuple(parse_labels(raw["ambient"])),
            canonical=tuple(parse_labels(raw["canonical"])),
            picard=int(raw["picard"]),
            q_cartier=raw.get("q_cartier"),
        ),
        closure=None if closure is None else str(closure),
    )


def _validate(atlas: Atlas) -> None:
    """Structural consistency of the loaded data; raises ValueError on corruption."""
    ids = [e.id for e in atlas.entries]
    if len(set(ids)) != len(ids):
        raise ValueError("Duplicate atlas ids")
    counts = atlas.class_counts()
    if counts != EXPECTED_CLASS_COUNTS:
        raise ValueError(f"Class counts {counts} differ from {EXPECTED_CLASS_COUNTS}")
    known = set(ids)
    for entry in atlas.entries:
        if entry.closure is not None:
            if entry.closure not in known:
                raise ValueError(f"Entry {entry.id} points to unknown closure {entry.closure}")
            parent = atlas.get(entry.closure)
            if parent.is_arrow or parent.fine_class != entry.fine_class:
                raise ValueError(f"Closure {entry.closure} of entry {entry.id} is not a closed row of its class")
        if entry.polytope.dim != 3:
            raise ValueError(f"Entry {entry.id} does not span a 3-tope")
    for data in atlas.classes.values():
        for entry_id in (data.maximal,) + data.minimal:
            if entry_id not in known:
                raise ValueError(f"Class {data.label} names unknown entry {entry_id}")
    if atlas.kanev_target not in known:
        raise ValueError(f"Kanev example target {atlas.kanev_target} is not an atlas id")


@lru_cache(maxsize=4)
def _load_atlas_file(path_str: str) -> Atlas:
    path = Path(path_str)
    if not path.exists():
        raise FileNotFoundError(f"Atlas file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)

        if "entries" not in data or "classes" not in data:
            raise ValueError("Invalid JSON structure: missing 'classes' or 'entries' key")

        classes = {label: _parse_class(label, raw) for label, raw in data["classes"].items()}
        entries = tuple(_parse_entry(raw, classes) for raw in data["entries"])
        kanev = data.get("examples", {}).get("kanev", {})
        atlas = Atlas(
            classes=classes,
            entries=entries,
            kanev_example=tuple(tuple(int(c) for c in v) for v in kanev.get("vertices", ())),
            kanev_target=str(kanev.get("isomorphic_to", "")),
        )
        _validate(atlas)

        logger.info(f"Loaded {len(atlas)} atlas entries from {path}")
        return atlas

    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in atlas file: {e}")
        raise RuntimeError(f"Failed to load atlas: invalid JSON: {e}") from e
    except Exception as e:
        logger.error(f"Error loading atlas: {e}")
        raise RuntimeError(f"Failed to load atlas: {e}") from e


def load_atlas(path: Optional[Union[str, Path]] = None) -> Atlas:
    """
    Load and validate the atlas (cached per path).

    Args:
        path: Atlas JSON file; defaults to the configured atlas path

    Returns:
        Atlas: 20 class-a, 26 class-b and one entry each for c, d, e

    Raises:
        FileNotFoundError: If the file does not exist
        RuntimeError: If the data is malformed or inconsistent
    """
    target = Path(path) if path is not None else get_settings().atlas_path
    return _load_atlas_file(str(target.resolve()))


# ============================================================================
# CLASSIFICATION
# ============================================================================


def classify_polytope(delta: Polytope, atlas: Atlas) -> str:
    """
    Atlas class of Δ by lattice isomorphism of F(Δ) with the reference Fine interiors.

    Raises:
        ValueError: If F(Δ) matches none of the five types
    """
    inner = fine_interior(delta)
    for label in sorted(atlas.classes):
        if lattice_isomorphic(inner, atlas.classes[label].fine_interior) is not None:
            return label
    raise ValueError("unknown Fine-interior type")


def classify(entry: AtlasEntry, atlas: Atlas) -> str:
    return classify_polytope(entry.polytope, atlas)


def fine_interior_types(atlas: Atlas) -> List[List[str]]:
    """Entries grouped by lattice isomorphism type of their Fine interiors."""
    groups: List[Tuple[Polytope, List[str]]] = []
    for entry in atlas.entries:
        inner = fine_interior(entry.polytope)
        for representative, members in groups:
            if lattice_isomorphic(inner, representative) is not None:
                members.append(entry.id)
                break
        else:
            groups.append((inner, [entry.id]))
    return [members for _, members in groups]


# ============================================================================
# CHECK HELPERS
# ============================================================================


def _compare(entry_id: str, check: str, expected, got) -> CheckResult:
    return CheckResult(entry_id=entry_id, check=check, passed=expected == got, expected=str(expected), got=str(got))


def _guarded(entry_id: str, check: str, expected, compute: Callable[[], object]) -> CheckResult:
    """Run one check, recording an exception as a failed result."""
    try:
        return _compare(entry_id, check, expected, compute())
    except Exception as e:
        logger.error(f"Check {check} failed on {entry_id}: {e}")
        return CheckResult(entry_id=entry_id, check=check, passed=False, expected=str(expected), got=f"error: {e}")


def _labels_of(counts: Dict[str, int]) -> Tuple[str, ...]:
    return tuple(sort_labels(label for label, k in counts.items() for _ in range(k)))


# ============================================================================
# EXTREMAL STRUCTURE
# ============================================================================


def _outer_facet(inner: Polytope) -> HalfSpace:
    """The facet of F not containing the origin."""
    far = [f for f in inner.facets if f.slack((0, 0, 0)) != 0]
    if len(far) != 1:
        raise ValueError(f"Fine interior has {len(far)} facets away from the origin")
    return far[0]


def inscribed_adjoint(data: ClassData) -> bool:
    """2·F_can lies in Δ_can and both have the same normal fan in the facet plane."""
    twice = dilate(facet_polytope(data.fine_interior, _outer_facet(data.fine_interior)), 2)
    can = data.adjoint_polytope
    if not contains(can, twice) or len(can.facets) != len(twice.facets):
        return False
    return all(minimizing_face(twice, [f.normal]).dim == 1 for f in can.facets) and all(
        minimizing_face(can, [f.normal]).dim == 1 for f in twice.facets
    )


def is_dilated_fine_interior(data: ClassData, maximal: Polytope) -> bool:
    """Whether the maximal polytope is a translate of k·F."""
    scaled = dilate(data.fine_interior, data.dilation)
    if len(scaled.vertices) != len(maximal.vertices):
        return False
    shift = vsub(maximal.vertices[0], scaled.vertices[0])
    return translate(scaled, shift) == maximal


def verify_extremal_structure(atlas: Atlas) -> List[CheckResult]:
    """
    Unique maximal polytope per class, minimal polytopes with their lattice
    counts, the dilation law and the inscribed adjoint facet.
    """
    results: List[CheckResult] = []
    for label in sorted(atlas.classes):
        data = atlas.classes[label]
        members = atlas.by_class(label)
        maximal = [e.id for e in members if all(contains(e.polytope, o.polytope) for o in members)]
        results.append(_compare(f"class-{label}", "unique_maximal", [data.maximal], maximal))

        minimal = [
            e.id
            for e in members
            if not any(o.id != e.id and o.polytope != e.polytope and contains(e.polytope, o.polytope) for o in members)
        ]
        results.append(_compare(f"class-{label}", "minimal_set", sorted(data.minimal), sorted(minimal)))
        if label in MINIMAL_LATTICE_COUNTS:
            counts = tuple(num_lattice_points(atlas.get(i).polytope) for i in data.minimal)
            results.append(_compare(f"class-{label}", "minimal_lattice_counts", MINIMAL_LATTICE_COUNTS[label], counts))

        results.append(
            _guarded(
                f"class-{label}",
                f"maximal_is_{data.dilation}F",
                True,
                lambda: is_dilated_fine_interior(data, atlas.maximal(label).polytope),
            )
        )
        results.append(_guarded(f"class-{label}", "inscribed_adjoint", True, lambda: inscribed_adjoint(data)))
    return results


def sandwich_check(entry: AtlasEntry, atlas: Atlas) -> bool:
    """Δ_min ⊆ Δ ⊆ Δ_max for a listed minimal Δ_min, and F(Δ) = F(Δ_max)."""
    data = atlas.classes[entry.fine_class]
    top = atlas.maximal(entry.fine_class).polytope
    if not contains(top, entry.polytope):
        return False
    if not any(contains(entry.polytope, atlas.get(i).polytope) for i in data.minimal):
        return False
    return fine_interior(entry.polytope) == fine_interior(top)


def arrow_consistency(entry: AtlasEntry, atlas: Atlas) -> bool:
    """Arrow rows close to their parent; other rows are canonically closed."""
    if entry.closure is None:
        return is_canonically_closed(entry.polytope)
    return canonical_closure(entry.polytope) == atlas.get(entry.closure).polytope


def closure_laws(delta: Polytope) -> bool:
    """F(C(Δ)) = F(Δ) and C(C(Δ)) = C(Δ)."""
    closure = canonical_closure(delta)
    return fine_interior(closure) == fine_interior(delta) and canonical_closure(closure) == closure


# ============================================================================
# DEGENERATION SPLIT
# ============================================================================


@dataclass
class DegenerationSplit:
    """Δ cut at a plane through three of its points."""

    plane_normal: NVector
    level: Fraction
    first: Polytope
    second: Polytope
    shared: Polytope

    @property
    def shared_reflexive(self) -> bool:
        return is_reflexive(self.shared)

    @property
    def components(self) -> Tuple[Polytope, Polytope]:
        return self.first, self.second


def degeneration_split(delta: Polytope, plane_points: Sequence[Sequence[int]], positive_point: Sequence[int]) -> DegenerationSplit:
    """
    Subdivide Δ by the plane through three points.

    Args:
        delta: Full-dimensional polytope
        plane_points: Three affinely independent points spanning the plane
        positive_point: A point on the side of the first component

    Raises:
        ValueError: If the points span no plane or the plane does not separate Δ
    """
    p, a, c = (tuple(x) for x in plane_points)
    direction = cross(vsub(a, p), vsub(c, p))
    if not any(direction):
        raise ValueError("plane points are collinear")
    normal = primitive_direction(direction)
    if pairing(normal, positive_point) < pairing(normal, p):
        normal = tuple(-x for x in normal)
    level = Fraction(pairing(normal, p))
    negative = tuple(-x for x in normal)
    first = from_halfspaces(list(delta.facets) + [HalfSpace(normal, level)], delta.equations)
    second = from_halfspaces(list(delta.facets) + [HalfSpace(negative, -level)], delta.equations)
    if first.dim < 3 or second.dim < 3:
        raise ValueError("plane does not separate the polytope")
    shared = convex_hull(v for v in first.vertices if pairing(normal, v) == level)
    logger.info(f"Split by plane {normal}·x = {level}: {len(first.vertices)} + {len(second.vertices)} vertices")
    return DegenerationSplit(plane_normal=normal, level=level, first=first, second=second, shared=shared)


def split_entry(entry: AtlasEntry, atlas: Atlas) -> DegenerationSplit:
    """
    Split a class maximal polytope at its plane of symmetry through p, a, c.

    Raises:
        ValueError: If the entry is not the maximal polytope of its class
    """
    data = atlas.classes[entry.fine_class]
    if entry.id != data.maximal:
        raise ValueError(f"Entry {entry.id} is not the maximal polytope of class {entry.fine_class}")
    return degeneration_split(entry.polytope, [data.point(n) for n in data.split], data.point("b"))


def _simplex_relation(normals: Sequence[NVector]) -> Tuple[Fraction, ...]:
    """Coefficients λ with λ_0 = 1 and Σ λ_i n_i = 0."""
    rows = [[normals[j][i] for j in range(1, 4)] for i in range(3)]
    rest = solve(rows, [-normals[0][i] for i in range(3)])
    if rest is None:
        raise ValueError("facet normals of the simplex are degenerate")
    return (Fraction(1),) + tuple(Fraction(x) for x in rest)


def component_K2(simplex: Polytope) -> Fraction:
    """
    K² of the surface Y in the toric variety of a simplex.

    With the facet-normal relation Σ λ_i n_i = 0 the class group tensored
    with Q is one-dimensional; Y has degree Σ λ_i·(-ord_i), K has degree
    -Σ λ_i, and K² = (deg(K+Y)/deg Y)² · Y³ with Y³ = 6·vol.

    Raises:
        ValueError: If the polytope is not a 3-simplex
    """
    if simplex.dim != 3 or len(simplex.facets) != 4:
        raise ValueError("component is not a 3-simplex")
    normals = [f.normal for f in simplex.facets]
    lam = _simplex_relation(normals)
    deg_y = sum(l * -f.level for l, f in zip(lam, simplex.facets))
    deg_k = -sum(lam)
    if deg_y == 0:
        raise ValueError("hypersurface class has degree zero")
    ratio = (deg_k + deg_y) / deg_y
    return ratio * ratio * self_intersection_top(simplex)


def component_singularities(simplex: Polytope) -> Dict[str, int]:
    found = two_cone_singularities(simplex, normal_fan(simplex).two_cones())
    return dict(sorted(found.items()))


# ============================================================================
# LATTICE MOVES
# ============================================================================


@dataclass
class CoarseningResult:
    image: Polytope
    kept: Tuple[NVector, ...]
    dropped: Tuple[NVector, ...]

    @property
    def reflexive(self) -> bool:
        return is_reflexive(self.image)


def lattice_coarsen(
    delta: Polytope,
    kept: Optional[Iterable[Sequence[int]]] = None,
    axis: int = 0,
    factor: int = 2,
) -> CoarseningResult:
    """
    Image of the hull of the kept lattice points in the coarser lattice where
    the ``axis`` coordinate is divided by ``factor``.

    Args:
        delta: Lattice polytope
        kept: Points to keep; defaults to the lattice points of Δ in the sublattice
        axis: Coordinate that is coarsened
        factor: Index of the sublattice

    Raises:
        ValueError: If a kept point lies outside the sublattice or the factor is not positive
    """
    if factor < 1:
        raise ValueError(f"Coarsening factor must be positive, got {factor}")
    if axis not in (0, 1, 2):
        raise ValueError(f"Axis must be 0, 1 or 2, got {axis}")
    points = lattice_points(delta)
    if kept is None:
        chosen = tuple(p for p in points if p[axis] % factor == 0)
    else:
        chosen = tuple(tuple(int(c) for c in p) for p in kept)
        offenders = [p for p in chosen if p[axis] % factor != 0]
        if offenders:
            raise ValueError(f"Points outside the index-{factor} sublattice: {offenders}")
    dropped = tuple(p for p in points if p not in set(chosen))
    image = convex_hull(tuple(c // factor if i == axis else c for i, c in enumerate(p)) for p in chosen)
    logger.info(f"Coarsened axis {axis} by {factor}: kept {len(chosen)}, dropped {len(dropped)}")
    return CoarseningResult(image=image, kept=chosen, dropped=dropped)


def refine_lattice(p: Polytope, axis: int = 1, factor: int = 2) -> Polytope:
    """Coordinates of P in the refined lattice with ``axis`` subdivided by ``factor``."""
    return convex_hull(tuple(c * factor if i == axis else c for i, c in enumerate(v)) for v in p.vertices)


@dataclass
class CoverInvariants:
    refined: Polytope
    refined_adjoint: Polytope
    interior_points: int
    adjoint_interior_points: int
    quadric_points: Tuple[NVector, ...]

    @property
    def p_g(self) -> int:
        return self.interior_points

    @property
    def K2(self) -> int:
        return self.adjoint_interior_points - 1

    @property
    def quadric_relation(self) -> bool:
        """Three collinear lattice points, the middle one the midpoint."""
        pts = self.quadric_points
        return len(pts) == 3 and vadd(pts[0], pts[2]) == vscale(2, pts[1])


def lattice_refine_cover(entry: AtlasEntry, atlas: Atlas) -> CoverInvariants:
    """
    Double cover of a Todorov-type surface from the lattice refinement halving e2.

    Raises:
        ValueError: If the entry is not of class c, d or e
    """
    if entry.fine_class not in TODOROV_CLASSES:
        raise ValueError(f"Lattice refinement applies to classes c, d, e; entry {entry.id} is class {entry.fine_class}")
    data = atlas.classes[entry.fine_class]
    refined = refine_lattice(entry.polytope)
    refined_can = refine_lattice(data.adjoint_polytope)
    twice = dilate(facet_polytope(data.fine_interior, _outer_facet(data.fine_interior)), 2)
    quadric = tuple(sorted(lattice_points(twice)))
    return CoverInvariants(
        refined=refined,
        refined_adjoint=refined_can,
        interior_points=num_interior_points(refined),
        adjoint_interior_points=num_interior_points(refined_can),
        quadric_points=quadric,
    )


# ============================================================================
# RANDOM SAMPLING
# ============================================================================


def random_canonical_fano(rng: random.Random, box: int = 5) -> Polytope:
    """
    Seeded rejection sampler of canonical Fano 3-topes inside [-box, box]³.

    Raises:
        RuntimeError: If no sample is accepted within the attempt limit
    """
    span = min(2, box)
    for _ in range(MAX_SAMPLER_ATTEMPTS):
        count = rng.randint(4, 8)
        pts = [tuple(rng.randint(-span, span) for _ in range(3)) for _ in range(count)]
        candidate = convex_hull(pts)
        if candidate.dim != 3 or not is_canonical_fano(candidate):
            continue
        slack = box - span
        shift = tuple(rng.randint(-slack, slack) for _ in range(3))
        return translate(candidate, shift)
    raise RuntimeError(f"Failed to sample a canonical Fano polytope in {MAX_SAMPLER_ATTEMPTS} attempts")


# ============================================================================
# PER-ENTRY VERIFICATION
# ============================================================================


def _adjoint_interior_count(delta: Polytope) -> Optional[int]:
    """l*(Δ_can), None when the polytope has no adjoint facet."""
    can = adjoint_polytope(delta)
    return None if can is None else num_interior_points(can)


def _rank_accounting(delta: Polytope) -> bool:
    """Picard - 1 equals the Dynkin node count plus the residual rank."""
    nodes = fixed_point_dynkin(delta).graph.number_of_nodes()
    return total_rank(canonical_model_singularities(delta)) == nodes + total_rank(residual_singularities(delta))


def _pluricanonical_basepointfree(delta: Polytope, m: int) -> bool:
    """m·(Z + K) is basepoint free on the crepant terminal refinement."""
    fan = crepant_refinement_of(delta)
    divisor = (divisor_from_ord(canonical_closure(delta), fan) + canonical_divisor(fan)).scale(m)
    return is_basepointfree(divisor, fan)


def verify_entry(entry: AtlasEntry, atlas: Atlas) -> List[CheckResult]:
    """
    Recompute every column of a row from its spanning set.

    Returns:
        List[CheckResult]: One result per check, failures included
    """
    delta = entry.polytope
    data = atlas.classes[entry.fine_class]
    expected = entry.expected
    kanev = entry.fine_class in KANEV_CLASSES
    K2 = 1 if kanev else 2
    chi = 2
    sections = (1, plurigenera_formula(chi, K2, 2), plurigenera_formula(chi, K2, 3))
    eid = entry.id
    results: List[CheckResult] = []

    if expected.lattice_points is not None:
        results.append(_guarded(eid, "lattice_points", expected.lattice_points, lambda: num_lattice_points(delta)))
    results.append(
        _guarded(eid, "canonical_fano", (True, False), lambda: (is_canonical_fano(delta), is_reflexive(delta)))
    )
    results.append(
        _guarded(eid, "adjoint_interior_points", K2 + 1, lambda: _adjoint_interior_count(delta))
    )
    results.append(_guarded(eid, "fine_interior", True, lambda: fine_interior(delta) == data.fine_interior))
    results.append(_guarded(eid, "class", entry.fine_class, lambda: classify_polytope(delta, atlas)))

    def computed_invariants():
        inv = invariants(delta)
        return (inv.p_g, inv.q, inv.K2, inv.index_m, inv.plurigenera)

    results.append(_guarded(eid, "invariants", (1, 0, K2, data.dilation, sections), computed_invariants))

    results.append(_guarded(eid, "ambient", expected.ambient, lambda: _labels_of(ambient_singularities(delta))))
    results.append(
        _guarded(eid, "canonical_rdp", expected.canonical, lambda: tuple(canonical_model_singularities(delta)))
    )
    results.append(
        _guarded(eid, "picard", expected.picard, lambda: 1 + total_rank(canonical_model_singularities(delta)))
    )
    results.append(_guarded(eid, "rank_accounting", True, lambda: _rank_accounting(delta)))
    results.append(_guarded(eid, "simple_dynkin_edges", 0, lambda: len(fixed_point_dynkin(delta).flagged_edges)))

    results.append(_guarded(eid, "closure", entry.closure or eid, lambda: _closure_id(entry, atlas)))
    results.append(_guarded(eid, "closure_laws", True, lambda: closure_laws(delta)))
    results.append(
        _guarded(
            eid,
            "support_stable_under_closure",
            True,
            lambda: tuple(support_set(delta)) == tuple(support_set(canonical_closure(delta))),
        )
    )
    results.append(
        _guarded(
            eid,
            "support_contains_delta_tilde_rays",
            True,
            lambda: set(delta_tilde_fan(delta).rays) <= set(support_set(delta)),
        )
    )
    results.append(_guarded(eid, "crepancy", True, lambda: crepancy_check(canonical_closure(delta))))
    results.append(
        _guarded(
            eid,
            "terminal_refinement",
            True,
            lambda: all(cone_is_terminal(c) for c in crepant_refinement_of(delta).cones()),
        )
    )
    results.append(
        _guarded(eid, "pluricanonical_basepointfree", True, lambda: _pluricanonical_basepointfree(delta, data.dilation))
    )
    results.append(_guarded(eid, "sandwich", True, lambda: sandwich_check(entry, atlas)))

    if not entry.is_arrow:
        results.append(
            _guarded(
                eid,
                "closed_rays_agree",
                True,
                lambda: set(delta_tilde_fan(delta).rays) == set(normal_fan(delta).rays),
            )
        )
    if expected.q_cartier is not None and not entry.is_arrow:
        results.append(
            _guarded(
                eid,
                "q_cartier",
                expected.q_cartier,
                lambda: is_q_cartier(adjoint_divisor(delta), normal_fan(delta)) is not None,
            )
        )
        results.append(
            _guarded(
                eid,
                "rho_condition",
                expected.q_cartier,
                lambda: all(delta.contains_point(data.point(n)) for n in data.rho_condition),
            )
        )
        results.append(_guarded(eid, "rho_isomorphism", expected.q_cartier, lambda: rho_is_isomorphism(delta)))
    if eid == data.maximal:
        results.append(
            _guarded(
                eid,
                "adjoint_index",
                data.dilation,
                lambda: is_q_cartier(adjoint_divisor(delta), normal_fan(delta)),
            )
        )

    failed = sum(1 for r in results if not r.passed)
    if failed:
        logger.warning(f"Entry {eid}: {failed} of {len(results)} checks failed")
    else:
        logger.info(f"Entry {eid}: all {len(results)} checks passed")
    return results


def _closure_id(entry: AtlasEntry, atlas: Atlas) -> str:
    """Id of the atlas row equal to C(Δ); the entry's own id when closed."""
    closure = canonical_closure(entry.polytope)
    for candidate in atlas.by_class(entry.fine_class):
        if candidate.polytope == closure:
            return candidate.id
    return "not in atlas"


# ============================================================================
# GLOBAL CHECKS
# ============================================================================


def _split_checks(atlas: Atlas) -> List[CheckResult]:
    results: List[CheckResult] = []
    for label in sorted(atlas.classes):
        entry = atlas.maximal(label)
        kanev = label in KANEV_CLASSES
        expected_k2 = 2 if kanev else 1
        expected_sing = {"A1": 3} if kanev else {"A1": 4}

        def summary():
            split = split_entry(entry, atlas)
            return (
                split.shared_reflexive,
                [component_K2(c) for c in split.components],
                [component_singularities(c) for c in split.components],
            )

        results.append(
            _guarded(entry.id, "degeneration_split", (True, [expected_k2] * 2, [expected_sing] * 2), summary)
        )
        if kanev:
            results.append(
                _guarded(entry.id, "split_top_intersection", 18, lambda: self_intersection_top(split_entry(entry, atlas).first))
            )
    return results


def _coarsening_checks(atlas: Atlas) -> List[CheckResult]:
    results: List[CheckResult] = []
    for label in sorted(atlas.classes):
        data = atlas.classes[label]
        entry = atlas.maximal(label)
        if data.dropped_by_coarsening is not None:
            names = sorted(data.dropped_by_coarsening)

            def dropped_names():
                result = lattice_coarsen(entry.polytope)
                lookup = {v: k for k, v in data.points.items()}
                return sorted(lookup.get(p, str(p)) for p in result.dropped), result.reflexive

            results.append(_guarded(entry.id, "coarsening", (names, True), dropped_names))
        else:

            def kept_count():
                result = lattice_coarsen(entry.polytope)
                return len(result.dropped), len(result.kept), result.reflexive

            results.append(_guarded(entry.id, "coarsening", (4, 11, True), kept_count))
    return results


def _cover_checks(atlas: Atlas) -> List[CheckResult]:
    results: List[CheckResult] = []
    for label in TODOROV_CLASSES:
        entry = atlas.maximal(label)

        def summary():
            cover = lattice_refine_cover(entry, atlas)
            return cover.interior_points, cover.adjoint_interior_points, cover.K2, cover.quadric_relation

        results.append(_guarded(entry.id, "double_cover", (3, 5, 4, True), summary))
    return results


def global_checks(
    atlas: Atlas,
    seed: Optional[int] = None,
    samples: Optional[int] = None,
    box: Optional[int] = None,
) -> List[CheckResult]:
    """
    Whole-atlas statements: five types, closed counts, the Kanev/Todorov
    dichotomy, extremal structure, splits, lattice moves and closure laws on
    seeded random canonical Fano polytopes.
    """
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    samples = settings.random_samples if samples is None else samples
    box = settings.sample_box if box is None else box
    results: List[CheckResult] = [_compare("atlas", "class_counts", EXPECTED_CLASS_COUNTS, atlas.class_counts())]

    results.append(
        _guarded(
            "atlas",
            "fine_interior_types",
            sorted(EXPECTED_CLASS_COUNTS.values(), reverse=True),
            lambda: sorted((len(g) for g in fine_interior_types(atlas)), reverse=True),
        )
    )
    for label, expected in CLOSED_COUNTS.items():
        members = atlas.by_class(label)
        listed = sum(1 for e in members if not e.is_arrow)
        if listed != expected:
            logger.warning(f"Class {label}: {listed} closed rows listed, {expected} expected")
        results.append(
            _guarded(
                f"class-{label}",
                "closed_count",
                (expected, len(members)),
                lambda members=members: (sum(1 for e in members if is_canonically_closed(e.polytope)), len(members)),
            )
        )

    def dichotomy():
        counts = {2: 0, 3: 0}
        for entry in atlas.entries:
            k = _adjoint_interior_count(entry.polytope)
            counts[k] = counts.get(k, 0) + 1
        return counts

    results.append(_guarded("atlas", "kanev_todorov_dichotomy", {2: 46, 3: 3}, dichotomy))

    results.extend(verify_extremal_structure(atlas))
    results.extend(_split_checks(atlas))
    results.extend(_coarsening_checks(atlas))
    results.extend(_cover_checks(atlas))

    if atlas.kanev_example:
        results.append(
            _guarded(
                atlas.kanev_target,
                "kanev_example",
                True,
                lambda: lattice_isomorphic(convex_hull(atlas.kanev_example), atlas.get(atlas.kanev_target).polytope)
                is not None,
            )
        )

    rng = random.Random(seed)
    for i in range(samples):
        results.append(_guarded("random", f"closure_laws[{i}]", True, lambda: closure_laws(random_canonical_fano(rng, box))))
    logger.info(f"Global checks: {sum(r.passed for r in results)}/{len(results)} passed")
    return results


# ============================================================================
# RENDERING
# ============================================================================


def entry_vertices(entry: AtlasEntry) -> List[List[int]]:
    return [list(to_ints(v)) for v in entry.polytope.vertices]


def atlas_markdown(atlas: Atlas, label: Optional[str] = None) -> str:
    """Markdown table of the expected columns, arrow rows prefixed with ⇒."""
    lines = [
        "| ID | spanning set | l(Δ) | sing. of Z_Δ̃ | sing. of Z_F(Δ) | generic ρ |",
        "|---|---|---|---|---|---|",
    ]
    for entry in atlas.entries:
        if label is not None and entry.fine_class != label:
            continue
        prefix = "⇒ " if entry.is_arrow else ""
        count = "" if entry.expected.lattice_points is None else str(entry.expected.lattice_points)
        lines.append(
            f"| {prefix}{entry.id} | {entry.spanning_label()} | {count} | "
            f"{format_labels(entry.expected.ambient)} | {format_labels(entry.expected.canonical)} | "
            f"{entry.expected.picard} |"
        )
    return "\n".join(lines) + "\n"
