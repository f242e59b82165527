"""Dual-representation polytopes with exact rational vertices.

A Polytope stores its vertices, its irredundant facet presentation and, when
it is not full-dimensional, the equations of its affine hull together with a
unimodular chart of the saturated lattice of that hull. Instances are
immutable; expensive derived data (lattice points, edges) is memoized.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from math import ceil, floor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sympy import Matrix, Poly, Rational, interpolate, symbols
from sympy.matrices.normalforms import hermite_normal_form

from app.services.exact_lattice import (
    LatticeChart,
    MVector,
    NVector,
    common_denominator,
    cross,
    det,
    inverse,
    is_integral,
    lattice_chart,
    mat_mul,
    mat_vec,
    pairing,
    primitive_direction,
    primitive_part,
    rank,
    to_fractions,
    to_ints,
    transpose,
    vadd,
    vscale,
    vsub,
)

# Configure logger
logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


# ============================================================================
# VALUE TYPES
# ============================================================================


@dataclass(frozen=True, order=True)
class HalfSpace:
    """
    The halfspace {x : <x, normal> >= level}.

    Also used for affine-hull equations, where the relation is an equality.
    """

    normal: NVector
    level: Fraction

    def __post_init__(self):
        normal = to_ints(self.normal)
        if primitive_part(normal)[1] != 1:
            raise ValueError(f"Halfspace normal {normal} is not primitive")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "level", Fraction(self.level))

    def slack(self, x: Sequence) -> Fraction:
        return pairing(x, self.normal) - self.level

    def contains(self, x: Sequence, strict: bool = False) -> bool:
        s = self.slack(x)
        return s > 0 if strict else s >= 0


@dataclass(frozen=True)
class UnimodularAffineMap:
    """x -> matrix · x + translation with an integral unimodular matrix."""

    matrix: Tuple[Tuple[int, ...], ...]
    translation: MVector

    def __post_init__(self):
        matrix = tuple(to_ints(row) for row in self.matrix)
        if abs(det(matrix)) != 1:
            raise ValueError(f"Matrix {matrix} is not unimodular")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "translation", to_fractions(self.translation))

    def apply(self, x: Sequence) -> MVector:
        return to_fractions(vadd(mat_vec(self.matrix, x), self.translation))

    def apply_all(self, points: Iterable[Sequence]) -> List[MVector]:
        return sorted(self.apply(p) for p in points)


IDENTITY_MAP_MATRIX = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


class Polytope:
    """
    Convex polytope in M_Q with exact rational vertices.

    Use ``convex_hull`` or ``from_halfspaces`` to build instances; the
    constructor trusts its arguments.
    """

    __slots__ = ("vertices", "facets", "equations", "dim", "chart", "_cache")

    def __init__(
        self,
        vertices: Sequence[MVector],
        facets: Sequence[HalfSpace],
        equations: Sequence[HalfSpace],
        dim: int,
        chart: Optional[LatticeChart],
    ):
        self.vertices: Tuple[MVector, ...] = tuple(sorted(vertices))
        self.facets: Tuple[HalfSpace, ...] = tuple(sorted(facets))
        self.equations: Tuple[HalfSpace, ...] = tuple(equations)
        self.dim = dim
        self.chart = chart
        self._cache: Dict[str, object] = {}

    @classmethod
    def empty(cls) -> "Polytope":
        return cls((), (), (), -1, None)

    @property
    def is_empty(self) -> bool:
        return self.dim < 0

    @property
    def full_dimensional(self) -> bool:
        return self.dim == 3

    @property
    def is_lattice(self) -> bool:
        return all(is_integral(v) for v in self.vertices)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Polytope) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        shown = ", ".join("(" + ",".join(str(c) for c in v) + ")" for v in self.vertices)
        return f"Polytope(dim={self.dim}, vertices=[{shown}])"

    def contains_point(self, x: Sequence, strict: bool = False) -> bool:
        """Membership test; ``strict`` asks for the relative interior."""
        if self.is_empty:
            return False
        if any(e.slack(x) != 0 for e in self.equations):
            return False
        return all(f.contains(x, strict) for f in self.facets)

    def tight_facets(self, x: Sequence) -> Tuple[HalfSpace, ...]:
        return tuple(f for f in self.facets if f.slack(x) == 0)

    def edges(self) -> Tuple[Tuple[MVector, MVector], ...]:
        """Vertex pairs spanning the edges of the polytope."""
        if "edges" not in self._cache:
            tight = {v: {f.normal for f in self.tight_facets(v)} for v in self.vertices}
            found = []
            for u, v in combinations(self.vertices, 2):
                common = tight[u] & tight[v]
                if rank(list(common)) == self.dim - 1:
                    found.append((u, v))
            self._cache["edges"] = tuple(found)
        return self._cache["edges"]


# ============================================================================
# CONSTRUCTION
# ============================================================================


def _supporting_normals(points: Sequence[Tuple[int, ...]], d: int) -> List[Tuple[int, ...]]:
    """Primitive inward facet normals of the hull of integer points in Z^d."""
    if d == 0:
        return []
    if d == 1:
        return [(1,), (-1,)]
    seen = set()
    normals = []
    for subset in combinations(range(len(points)), d):
        base = points[subset[0]]
        if d == 2:
            diff = vsub(points[subset[1]], base)
            c = (-diff[1], diff[0])
        else:
            c = cross(vsub(points[subset[1]], base), vsub(points[subset[2]], base))
        if not any(c):
            continue
        c = primitive_part(c)[0]
        ref = pairing(c, base)
        if (c, ref) in seen:
            continue
        seen.add((c, ref))
        seen.add((tuple(-x for x in c), -ref))
        above = below = False
        for y in points:
            s = pairing(c, y) - ref
            if s > 0:
                above = True
            elif s < 0:
                below = True
            if above and below:
                break
        else:
            inward = c if not below else tuple(-x for x in c)
            if inward not in normals:
                normals.append(inward)
    return normals


def convex_hull(points: Iterable[Sequence]) -> Polytope:
    """
    Convex hull of a finite set of rational points.

    Works in every dimension 0 to 3; lower-dimensional hulls carry the
    equations of their affine hull and facets relative to it.

    Args:
        points: Rational M-vectors

    Returns:
        Polytope: the hull (empty if no points are given)
    """
    pts = sorted({to_fractions(p) for p in points})
    if not pts:
        return Polytope.empty()
    base = pts[0]
    diffs = [vsub(p, base) for p in pts]
    chart = lattice_chart(diffs)
    d = chart.dim
    heads = [chart.head(x) for x in diffs]
    scale = common_denominator(heads) if d else 1
    ints = [to_ints(vscale(scale, h)) for h in heads]
    chart_normals = _supporting_normals(ints, d)

    levels = {n: min(pairing(n, y) for y in ints) for n in chart_normals}
    vertices = []
    for p, y in zip(pts, ints):
        tight = [n for n in chart_normals if pairing(n, y) == levels[n]]
        if rank(tight) == d:
            vertices.append(p)

    facets = []
    for n in chart_normals:
        lifted = chart.lift_functional(n)
        facets.append(HalfSpace(lifted, min(pairing(lifted, v) for v in vertices)))
    equations = [HalfSpace(row, pairing(row, base)) for row in chart.trailing_functionals()]
    return Polytope(vertices, facets, equations, d, chart)


def from_halfspaces(
    halfspaces: Iterable[HalfSpace], equations: Iterable[HalfSpace] = ()
) -> Polytope:
    """
    Exact vertex enumeration of a bounded system of halfspaces and equations.

    Args:
        halfspaces: Inequalities <x, normal> >= level
        equations: Equalities <x, normal> = level

    Returns:
        Polytope: the solution set; an empty polytope if infeasible
    """
    ineqs = sorted(set(halfspaces))
    eqs = sorted(set(equations))
    rows = [(h.normal, h.level) for h in ineqs] + [(e.normal, e.level) for e in eqs]
    crosses: Dict[Tuple[int, int], tuple] = {}

    def pair_cross(i: int, j: int) -> tuple:
        if (i, j) not in crosses:
            crosses[(i, j)] = cross(rows[i][0], rows[j][0])
            crosses[(j, i)] = tuple(-c for c in crosses[(i, j)])
        return crosses[(i, j)]

    checked: Dict[MVector, bool] = {}
    found = []
    for i, j, k in combinations(range(len(rows)), 3):
        cjk = pair_cross(j, k)
        denom = pairing(rows[i][0], cjk)
        if denom == 0:
            continue
        numer = vadd(
            vadd(vscale(rows[i][1], cjk), vscale(rows[j][1], pair_cross(k, i))),
            vscale(rows[k][1], pair_cross(i, j)),
        )
        x = tuple(Fraction(c) / denom for c in numer)
        if x in checked:
            continue
        ok = all(h.slack(x) >= 0 for h in ineqs) and all(e.slack(x) == 0 for e in eqs)
        checked[x] = ok
        if ok:
            found.append(x)
    if not found:
        logger.debug(f"Halfspace system with {len(rows)} rows is infeasible")
        return Polytope.empty()
    return convex_hull(found)


# ============================================================================
# LATTICE POINTS
# ============================================================================


def _z_window(constraints, equations, x: int, y: int, strict: bool, zmin: int, zmax: int):
    lo, hi = zmin, zmax
    for h in constraints:
        a = h.normal[2]
        b = h.level - h.normal[0] * x - h.normal[1] * y
        if a == 0:
            if b > 0 or (strict and b == 0):
                return None
            continue
        bound = Fraction(b) / a
        if a > 0:
            lo = max(lo, floor(bound) + 1 if strict else ceil(bound))
        else:
            hi = min(hi, ceil(bound) - 1 if strict else floor(bound))
        if lo > hi:
            return None
    for e in equations:
        a = e.normal[2]
        b = e.level - e.normal[0] * x - e.normal[1] * y
        if a == 0:
            if b != 0:
                return None
            continue
        z = Fraction(b) / a
        if z.denominator != 1 or not lo <= z <= hi:
            return None
        lo = hi = int(z)
    return lo, hi


def _scan(p: Polytope, strict: bool) -> Tuple[Tuple[int, int, int], ...]:
    if p.is_empty:
        return ()
    lows = [floor(min(v[i] for v in p.vertices)) for i in range(3)]
    highs = [ceil(max(v[i] for v in p.vertices)) for i in range(3)]
    found = []
    for x in range(lows[0], highs[0] + 1):
        for y in range(lows[1], highs[1] + 1):
            window = _z_window(p.facets, p.equations, x, y, strict, lows[2], highs[2])
            if window is None:
                continue
            for z in range(window[0], window[1] + 1):
                found.append((x, y, z))
    return tuple(found)


def lattice_points(p: Polytope) -> Tuple[Tuple[int, int, int], ...]:
    """All lattice points of P, sorted."""
    if "points" not in p._cache:
        p._cache["points"] = _scan(p, strict=False)
    return p._cache["points"]


def interior_lattice_points(p: Polytope) -> Tuple[Tuple[int, int, int], ...]:
    """Lattice points in the relative interior of P, sorted."""
    if "interior" not in p._cache:
        p._cache["interior"] = _scan(p, strict=True)
    return p._cache["interior"]


def num_lattice_points(p: Polytope) -> int:
    return len(lattice_points(p))


def num_interior_points(p: Polytope) -> int:
    return len(interior_lattice_points(p))


# ============================================================================
# ARITHMETIC
# ============================================================================


def minimum(p: Polytope, nu: Sequence[int]) -> Fraction:
    """min of <x, nu> over P (attained at a vertex)."""
    if p.is_empty:
        raise ValueError("minimum over an empty polytope")
    return min(pairing(v, nu) for v in p.vertices)


def _minkowski_candidates(p: Polytope) -> List[NVector]:
    normals = [f.normal for f in p.facets]
    if p.dim == 2:
        for e in p.equations:
            normals.extend([e.normal, tuple(-x for x in e.normal)])
    return normals


def minkowski_sum(p: Polytope, q: Polytope) -> Polytope:
    """
    Minkowski sum P + Q.

    For a full-dimensional sum the facet normals are drawn from the facet
    normals of the summands and cross products of their edge directions;
    otherwise the hull of pairwise vertex sums is taken.
    """
    if p.is_empty or q.is_empty:
        return Polytope.empty()
    sums = {vadd(v, w) for v in p.vertices for w in q.vertices}
    if rank([vsub(s, next(iter(sums))) for s in sums]) < 3:
        return convex_hull(sums)

    candidates = set()
    for n in _minkowski_candidates(p) + _minkowski_candidates(q):
        candidates.add(n)
    for u1, u2 in p.edges():
        for w1, w2 in q.edges():
            c = cross(vsub(u2, u1), vsub(w2, w1))
            if any(c):
                direction = primitive_direction(c)
                candidates.add(direction)
                candidates.add(tuple(-x for x in direction))

    facets = []
    for n in sorted(candidates):
        face_p = _argmin(p.vertices, n)
        face_q = _argmin(q.vertices, n)
        face = [vadd(v, w) for v in face_p for w in face_q]
        if rank([vsub(x, face[0]) for x in face]) == 2:
            facets.append(HalfSpace(n, minimum(p, n) + minimum(q, n)))

    vertices = []
    for s in sorted(sums):
        tight = [f.normal for f in facets if f.slack(s) == 0]
        if rank(tight) == 3:
            vertices.append(s)
    identity = lattice_chart([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    return Polytope(vertices, facets, (), 3, identity)


def _argmin(points: Sequence[MVector], nu: Sequence[int]) -> List[MVector]:
    values = [pairing(v, nu) for v in points]
    best = min(values)
    return [v for v, x in zip(points, values) if x == best]


def dilate(p: Polytope, n: int) -> Polytope:
    """
    The dilation n·P.

    Raises:
        ValueError: If n is not a positive integer
    """
    if n <= 0:
        raise ValueError(f"Dilation factor must be positive, got {n}")
    return convex_hull(vscale(n, v) for v in p.vertices)


def translate(p: Polytope, t: Sequence) -> Polytope:
    return convex_hull(vadd(v, t) for v in p.vertices)


def denominator_index(p: Polytope) -> int:
    """Least m >= 1 such that m·P is a lattice polytope."""
    return common_denominator(p.vertices)


def contains(p: Polytope, q: Polytope) -> bool:
    """Whether Q is a subset of P."""
    return all(p.contains_point(v) for v in q.vertices)


# ============================================================================
# FACES, LENGTHS AND VOLUME
# ============================================================================


def minimizing_face(p: Polytope, normals: Iterable[Sequence[int]]) -> Polytope:
    """
    The face of P on which every given normal attains its minimum over P.

    Raises:
        ValueError: If no normals are given or they share no minimizing face
    """
    normals = list(normals)
    if not normals:
        raise ValueError("minimizing face needs at least one normal")
    face = set(p.vertices)
    for nu in normals:
        face &= set(_argmin(p.vertices, nu))
    if not face:
        raise ValueError(f"Normals {normals} do not lie in a common normal cone")
    return convex_hull(face)


def edge_lattice_length(s: Sequence, t: Sequence) -> int:
    """
    Lattice length of the segment [s, t].

    Raises:
        ValueError: If an endpoint is not a lattice point
    """
    if not (is_integral(s) and is_integral(t)):
        raise ValueError("lattice length undefined")
    diff = vsub(to_ints(s), to_ints(t))
    if not any(diff):
        return 0
    return primitive_part(diff)[1]


def face_lattice_length(face: Polytope) -> int:
    """Lattice length of a one-dimensional face, 0 for anything else."""
    if face.dim != 1:
        return 0
    return edge_lattice_length(face.vertices[0], face.vertices[-1])


def volume(p: Polytope) -> Fraction:
    """
    Exact Euclidean volume via a pulling triangulation.

    Raises:
        ValueError: If P is not full-dimensional
    """
    if p.dim < 3:
        raise ValueError("not full-dimensional")
    apex = p.vertices[0]
    edges = set(p.edges())
    total = Fraction(0)
    for f in p.facets:
        if f.slack(apex) == 0:
            continue
        on_facet = [v for v in p.vertices if f.slack(v) == 0]
        pivot = on_facet[0]
        for u, v in combinations(on_facet[1:], 2):
            if (u, v) not in edges and (v, u) not in edges:
                continue
            rows = (vsub(pivot, apex), vsub(u, apex), vsub(v, apex))
            total += abs(Fraction(det(rows))) / 6
    return total


# ============================================================================
# LATTICE ISOMORPHISM AND NORMAL FORMS
# ============================================================================


def affine_lattice_coordinates(p: Polytope) -> List[MVector]:
    """Vertices in the unimodular chart of the affine hull, first vertex at 0."""
    if p.is_empty:
        return []
    base = p.vertices[0]
    return [to_fractions(p.chart.head(vsub(v, base))) for v in p.vertices]


def _affine_basis(coords: Sequence[MVector], d: int) -> List[int]:
    chosen = [0]
    for i in range(1, len(coords)):
        trial = [coords[j] for j in chosen[1:]] + [coords[i]]
        if rank(trial) == len(trial):
            chosen.append(i)
        if len(chosen) == d + 1:
            break
    return chosen


def _block(u: Sequence[Sequence], d: int) -> Tuple[Tuple, ...]:
    rows = []
    for i in range(3):
        if i < d:
            rows.append(tuple(u[i]) + tuple(0 for _ in range(3 - d)))
        else:
            rows.append(tuple(1 if j == i else 0 for j in range(3)))
    return tuple(rows)


def lattice_isomorphic(p: Polytope, q: Polytope) -> Optional[UnimodularAffineMap]:
    """
    Search for a unimodular affine map with U·P + t = Q.

    The translation t is required to be a lattice vector. Ordered affine bases
    of Q's vertices are matched against a fixed affine basis of P.

    Returns:
        Optional[UnimodularAffineMap]: a map carrying P onto Q, or None
    """
    if p.dim != q.dim or len(p.vertices) != len(q.vertices):
        return None
    if p.is_empty:
        return UnimodularAffineMap(IDENTITY_MAP_MATRIX, (0, 0, 0))
    d = p.dim
    target = set(q.vertices)
    if d == 0:
        t = vsub(q.vertices[0], p.vertices[0])
        if is_integral(t):
            return UnimodularAffineMap(IDENTITY_MAP_MATRIX, t)
        return None

    yp = affine_lattice_coordinates(p)
    yq = affine_lattice_coordinates(q)
    q_set = set(yq)
    basis = _affine_basis(yp, d)
    ep = transpose([yp[i] for i in basis[1:]])
    ep_inv = inverse(ep)
    ep_det = abs(det(ep))
    forward_p = p.chart.forward
    backward_q = q.chart.backward

    for tup in permutations(range(len(yq)), d + 1):
        s = yq[tup[0]]
        eq_cols = [vsub(yq[j], s) for j in tup[1:]]
        eq = transpose(eq_cols)
        if abs(det(eq)) != ep_det:
            continue
        u = mat_mul(eq, ep_inv)
        if not all(is_integral(row) for row in u):
            continue
        if {vadd(mat_vec(u, y), s) for y in yp} != q_set:
            continue
        m = mat_mul(mat_mul(backward_q, _block(u, d)), forward_p)
        shift = mat_vec(backward_q, tuple(s) + (0,) * (3 - d))
        t = vsub(vadd(q.vertices[0], shift), mat_vec(m, p.vertices[0]))
        if not is_integral(t) or not all(is_integral(row) for row in m):
            continue
        candidate = UnimodularAffineMap(m, t)
        if set(candidate.apply_all(p.vertices)) == target:
            return candidate
    return None


def normal_form(p: Polytope) -> Tuple[Tuple[int, ...], ...]:
    """
    Lattice-isomorphism invariant normal form of a lattice polytope.

    Every ordered affine basis of vertices is brought to Hermite normal form;
    the lexicographically least sorted image of the vertex set wins.

    Raises:
        ValueError: If P is not a lattice polytope
        RuntimeError: If a Hermite transform fails to be unimodular
    """
    if not p.is_lattice:
        raise ValueError("normal form is defined for lattice polytopes only")
    if p.dim <= 0:
        return tuple((0,) * max(p.dim, 0) for _ in p.vertices)
    d = p.dim
    ys = [to_ints(y) for y in affine_lattice_coordinates(p)]
    best = None
    for tup in permutations(range(len(ys)), d + 1):
        base = ys[tup[0]]
        e = transpose([vsub(ys[j], base) for j in tup[1:]])
        if det(e) == 0:
            continue
        h = hermite_normal_form(Matrix(e).T)
        h_rows = tuple(tuple(int(h[j, i]) for j in range(h.rows)) for i in range(h.cols))
        u = mat_mul(h_rows, inverse(e))
        if not all(is_integral(row) for row in u) or abs(det(u)) != 1:
            raise RuntimeError(f"Failed to normalize basis {tup}: transform {u} is not unimodular")
        image = tuple(sorted(to_ints(mat_vec(u, vsub(y, base))) for y in ys))
        if best is None or image < best:
            best = image
    return best


# ============================================================================
# PREDICATES
# ============================================================================


def facet_distance(p: Polytope, facet: HalfSpace, point: Sequence) -> Fraction:
    """Lattice distance of a point from a facet hyperplane."""
    return facet.slack(point)


def unique_interior_point(p: Polytope) -> Optional[Tuple[int, int, int]]:
    inner = interior_lattice_points(p)
    return inner[0] if len(inner) == 1 else None


def is_reflexive(p: Polytope) -> bool:
    """Unique interior lattice point and every facet at lattice distance 1 from it."""
    if p.is_empty or not p.is_lattice or p.dim < 1:
        return False
    c = unique_interior_point(p)
    if c is None:
        return False
    return all(facet_distance(p, f, c) == 1 for f in p.facets)


def is_canonical_fano(p: Polytope) -> bool:
    """Full-dimensional lattice polytope with one interior point and primitive vertices."""
    if p.dim != 3 or not p.is_lattice:
        return False
    c = unique_interior_point(p)
    if c is None:
        return False
    for v in p.vertices:
        diff = vsub(to_ints(v), c)
        if not any(diff) or primitive_part(diff)[1] != 1:
            return False
    return True


# ============================================================================
# EHRHART FIT
# ============================================================================


@dataclass(frozen=True)
class EhrhartFit:
    """Cubic interpolation of l(nP) from n = 1..4 with its prediction at n = 5."""

    coefficients: Tuple[Fraction, ...]
    counts: Tuple[int, ...]
    predicted: Fraction
    actual: int

    @property
    def exact(self) -> bool:
        return self.predicted == self.actual


def ehrhart_fit(p: Polytope) -> EhrhartFit:
    """
    Fit a degree-3 polynomial to l(nP) for n = 1..4 and test it at n = 5.

    Raises:
        ValueError: If P is not a lattice polytope
    """
    if not p.is_lattice:
        raise ValueError("Ehrhart fit needs a lattice polytope")
    n = symbols("n")
    counts = tuple(num_lattice_points(dilate(p, k)) for k in range(1, 5))
    poly = interpolate(list(zip(range(1, 5), counts)), n)
    coefficients = tuple(
        Fraction(int(Rational(c).p), int(Rational(c).q)) for c in Poly(poly, n).all_coeffs()
    )
    predicted = Rational(poly.subs(n, 5))
    actual = num_lattice_points(dilate(p, 5))
    return EhrhartFit(
        coefficients=coefficients,
        counts=counts,
        predicted=Fraction(int(predicted.p), int(predicted.q)),
        actual=actual,
    )

