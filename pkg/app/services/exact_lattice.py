"""Exact integer and rational linear algebra on the rank-3 lattices M and N.

M-vectors are monomial exponents (rational variants carry Fractions), N-vectors
are facet normals and ray generators (always integral). The two only meet
through ``pairing``. Everything here is a pure function of its arguments.
"""

import logging
from fractions import Fraction
from functools import reduce
from itertools import combinations
from math import gcd, lcm
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Matrix
from sympy.core.intfunc import igcdex
from sympy.matrices.normalforms import hermite_normal_form, invariant_factors

# Configure logger
logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

NVector = Tuple[int, ...]
MVector = Tuple[Fraction, ...]
IntMatrix = Tuple[Tuple[int, ...], ...]


# ============================================================================
# VECTOR HELPERS
# ============================================================================


def to_fractions(v: Sequence) -> MVector:
    """Convert a coordinate sequence into a tuple of Fractions."""
    return tuple(Fraction(x) for x in v)


def to_ints(v: Sequence) -> NVector:
    """
    Convert a coordinate sequence into integers.

    Raises:
        ValueError: If a coordinate is not integral
    """
    out = []
    for x in v:
        x = Fraction(x)
        if x.denominator != 1:
            raise ValueError(f"Non-integral coordinate {x} in {tuple(v)}")
        out.append(x.numerator)
    return tuple(out)


def is_integral(v: Sequence) -> bool:
    return all(Fraction(x).denominator == 1 for x in v)


def pairing(m: Sequence, n: Sequence):
    """The pairing <m, n> between M and N."""
    return sum(a * b for a, b in zip(m, n))


def vadd(u: Sequence, v: Sequence) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


def vsub(u: Sequence, v: Sequence) -> tuple:
    return tuple(a - b for a, b in zip(u, v))


def vscale(k, v: Sequence) -> tuple:
    return tuple(k * a for a in v)


def cross(u: Sequence, v: Sequence) -> tuple:
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def det(rows: Sequence[Sequence]):
    """Exact determinant of a square matrix of size at most 3."""
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    if n == 3:
        return pairing(rows[0], cross(rows[1], rows[2]))
    raise ValueError(f"Determinant of size {n} is not supported")


def common_denominator(vectors: Sequence[Sequence]) -> int:
    """Least common multiple of all coordinate denominators."""
    return reduce(lcm, (Fraction(x).denominator for v in vectors for x in v), 1)


def rank(vectors: Sequence[Sequence]) -> int:
    """Rank of a list of rational vectors (fraction-exact Gaussian elimination)."""
    rows = [list(map(Fraction, v)) for v in vectors if any(v)]
    if not rows:
        return 0
    width = len(rows[0])
    r = 0
    for col in range(width):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                factor = rows[i][col] / rows[r][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def solve(rows: Sequence[Sequence], rhs: Sequence) -> Optional[MVector]:
    """
    Solve the square system rows · x = rhs exactly.

    Returns:
        Optional[MVector]: The unique solution, or None if the matrix is singular
    """
    n = len(rows)
    aug = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(rows, rhs)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [a / p for a in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                factor = aug[i][col]
                aug[i] = [a - factor * b for a, b in zip(aug[i], aug[col])]
    return tuple(aug[i][n] for i in range(n))


def inverse(rows: Sequence[Sequence]) -> Optional[Tuple[MVector, ...]]:
    """Exact inverse of a square rational matrix, or None if singular."""
    n = len(rows)
    columns = []
    for j in range(n):
        e = [1 if i == j else 0 for i in range(n)]
        col = solve(rows, e)
        if col is None:
            return None
        columns.append(col)
    return tuple(tuple(columns[j][i] for j in range(n)) for i in range(n))


def mat_vec(rows: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(pairing(row, v) for row in rows)


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> tuple:
    cols = list(zip(*b))
    return tuple(tuple(pairing(row, col) for col in cols) for row in a)


def transpose(a: Sequence[Sequence]) -> tuple:
    return tuple(tuple(col) for col in zip(*a))


# ============================================================================
# PRIMITIVE VECTORS AND NORMAL FORMS
# ============================================================================


def primitive_part(v: Sequence[int]) -> Tuple[NVector, int]:
    """
    Split an integer vector into its primitive direction and positive factor.

    Args:
        v: Nonzero integer vector

    Returns:
        Tuple[NVector, int]: (primitive vector, factor) with v = factor · primitive

    Raises:
        ValueError: If v is the zero vector or not integral
    """
    v = to_ints(v)
    g = reduce(gcd, v, 0)
    if g == 0:
        raise ValueError("zero has no primitive part")
    return tuple(x // g for x in v), g


def primitive_direction(v: Sequence) -> NVector:
    """Primitive integer vector pointing along a nonzero rational vector."""
    scale = common_denominator([v])
    return primitive_part([Fraction(x) * scale for x in v])[0]


def unimodular_completion(row: Sequence[int]) -> IntMatrix:
    """
    Find an integer matrix V with det ±1 such that row · V = e1.

    Column operations driven by extended gcds reduce the row to (1, 0, ..., 0);
    V accumulates them.

    Raises:
        ValueError: If the row is not primitive
    """
    a = list(to_ints(row))
    n = len(a)
    cols = [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    for i in range(n - 1, 0, -1):
        if a[i] == 0:
            continue
        s, t, g = igcdex(a[0], a[i])
        s, t, g = int(s), int(t), int(g)
        c0, ci = cols[0], cols[i]
        new0 = [s * x + t * y for x, y in zip(c0, ci)]
        newi = [(-a[i] // g) * x + (a[0] // g) * y for x, y in zip(c0, ci)]
        cols[0], cols[i] = new0, newi
        a[0], a[i] = g, 0
    if abs(a[0]) != 1:
        raise ValueError(f"Row {tuple(row)} is not primitive")
    if a[0] == -1:
        cols[0] = [-x for x in cols[0]]
    return tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))


def integer_inverse(u: Sequence[Sequence[int]]) -> IntMatrix:
    """
    Inverse of a unimodular integer matrix.

    Raises:
        ValueError: If the matrix is not unimodular
    """
    if abs(det(u)) != 1:
        raise ValueError("matrix is not unimodular")
    inv = inverse(u)
    return tuple(to_ints(row) for row in inv)


def lattice_index(vectors: Sequence[Sequence[int]]) -> int:
    """
    Index of the lattice generated by integer vectors inside its saturation.

    Equal to the product of the nonzero invariant factors.
    """
    rows = [list(to_ints(v)) for v in vectors]
    if not rows or rank(rows) == 0:
        return 1
    factors = invariant_factors(Matrix(rows))
    return int(reduce(lambda x, y: x * y, (abs(int(f)) for f in factors if f != 0), 1))


def hermite_basis(vectors: Sequence[Sequence[int]]) -> Tuple[NVector, ...]:
    """
    Canonical basis (column Hermite normal form) of the lattice spanned by
    integer column vectors of full column rank.
    """
    columns = Matrix([list(to_ints(v)) for v in vectors]).T
    h = hermite_normal_form(columns)
    return tuple(tuple(int(h[i, j]) for i in range(h.rows)) for j in range(h.cols))


# ============================================================================
# LATTICE CHARTS
# ============================================================================


class LatticeChart:
    """
    Unimodular coordinates adapted to the saturated span of some vectors.

    ``forward`` maps N (or M) to Z^3 so that span ∩ lattice becomes
    Z^d × 0; ``backward`` inverts it.
    """

    __slots__ = ("forward", "backward", "dim")

    def __init__(self, forward: IntMatrix, backward: IntMatrix, dim: int):
        self.forward = forward
        self.backward = backward
        self.dim = dim

    def to_chart(self, v: Sequence) -> tuple:
        return mat_vec(self.forward, v)

    def head(self, v: Sequence) -> tuple:
        return self.to_chart(v)[: self.dim]

    def from_head(self, y: Sequence) -> tuple:
        full = tuple(y) + (0,) * (3 - self.dim)
        return mat_vec(self.backward, full)

    def lift_functional(self, n: Sequence[int]) -> NVector:
        """Pull a functional on chart coordinates back to the ambient lattice."""
        full = tuple(n) + (0,) * (3 - self.dim)
        return mat_vec(transpose(self.forward), full)

    def trailing_functionals(self) -> Tuple[NVector, ...]:
        """Rows of the chart that are constant on the span."""
        return tuple(tuple(row) for row in self.forward[self.dim :])


def lattice_chart(vectors: Sequence[Sequence]) -> LatticeChart:
    """
    Build a unimodular chart for the saturated lattice of a set of vectors.

    Args:
        vectors: Rational vectors (scaled internally to integers)

    Returns:
        LatticeChart: chart whose first ``dim`` coordinates span the saturation
    """
    nonzero = [v for v in vectors if any(v)]
    scale = common_denominator(nonzero) if nonzero else 1
    ints = [to_ints(vscale(scale, v)) for v in nonzero]
    d = rank(ints)
    identity = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    if d == 3 or d == 0:
        return LatticeChart(identity, identity, d)
    if d == 2:
        u, v = next(
            (p, q) for p, q in combinations(ints, 2) if any(cross(p, q))
        )
        w = primitive_part(cross(u, v))[0]
        comp = unimodular_completion(w)
        # columns of comp: c1 with <w,c1> = 1, c2 and c3 spanning ker w
        c1, c2, c3 = transpose(comp)
        backward = transpose((c2, c3, c1))
        return LatticeChart(integer_inverse(backward), backward, 2)
    direction = primitive_part(ints[0])[0]
    comp = unimodular_completion(direction)
    forward = transpose(comp)
    return LatticeChart(forward, integer_inverse(forward), 1)


def plane_lattice_basis(u: Sequence[int], v: Sequence[int]) -> Tuple[NVector, NVector]:
    """
    Basis of the lattice N ∩ span(u, v).

    Args:
        u: N-vector
        v: N-vector independent of u

    Returns:
        Tuple[NVector, NVector]: a basis of the saturated plane lattice, in
        column Hermite normal form

    Raises:
        ValueError: If u and v are parallel
    """
    u, v = to_ints(u), to_ints(v)
    if not any(cross(u, v)):
        raise ValueError("degenerate cone")
    chart = lattice_chart([u, v])
    b1 = chart.from_head((1, 0))
    b2 = chart.from_head((0, 1))
    basis = hermite_basis([b1, b2])
    for x in (u, v):
        coords = express_in_basis(x, basis)
        if coords is None or not is_integral(coords):
            raise RuntimeError(f"Failed to express {x} in plane basis {basis}")
    return basis[0], basis[1]


def express_in_basis(x: Sequence, basis: Sequence[Sequence]) -> Optional[MVector]:
    """Coordinates of x in a basis of its span (None if x is outside the span)."""
    k = len(basis)
    gram = [[pairing(a, b) for b in basis] for a in basis]
    rhs = [pairing(a, x) for a in basis]
    coords = solve(gram, rhs)
    if coords is None:
        return None
    back = reduce(vadd, (vscale(c, b) for c, b in zip(coords, basis)), (0,) * len(x))
    if tuple(Fraction(a) for a in back) != tuple(Fraction(a) for a in x):
        return None
    return coords[:k]


def cone2_multiplicity(u: Sequence[int], v: Sequence[int]) -> int:
    """
    Multiplicity of the 2-cone spanned by two primitive N-vectors.

    This is the index of Zu + Zv in N ∩ span(u, v); the cone yields a
    transversal singularity of type A_{m-1}.

    Raises:
        ValueError: If u and v are parallel
    """
    u, v = to_ints(u), to_ints(v)
    if not any(cross(u, v)):
        raise ValueError("degenerate cone")
    return lattice_index([u, v])


# ============================================================================
# CONES AND HILBERT BASES
# ============================================================================


def _chart_facets(gens: Sequence[NVector], d: int) -> List[NVector]:
    """Inward facet normals of the cone spanned by gens in Z^d."""
    normals = set()
    if d == 1:
        signs = {1 if g[0] > 0 else -1 for g in gens}
        return [(s,) for s in signs]
    if d == 2:
        candidates = [(-g[1], g[0]) for g in gens]
    else:
        candidates = [cross(p, q) for p, q in combinations(gens, 2)]
    for c in candidates:
        if not any(c):
            continue
        values = [pairing(c, g) for g in gens]
        if all(x >= 0 for x in values):
            normals.add(primitive_part(c)[0])
        if all(x <= 0 for x in values):
            normals.add(primitive_part(tuple(-x for x in c))[0])
    return sorted(normals)


def _chart_extreme_rays(gens: Sequence[NVector], facets: Sequence[NVector], d: int) -> List[NVector]:
    rays = set()
    for g in gens:
        p = primitive_part(g)[0]
        tight = [f for f in facets if pairing(f, p) == 0]
        if d == 1 or rank(tight) == d - 1:
            rays.add(p)
    return sorted(rays)


def _parallelepiped_points(generators: Sequence[NVector]) -> List[NVector]:
    """Lattice points of the half-open parallelepiped of a simplicial cone in Z^d."""
    d = len(generators)
    g = transpose(generators)
    g_inv = inverse(g)
    if g_inv is None:
        raise ValueError("degenerate cone")
    units = [tuple(g_inv[i][j] % 1 for i in range(d)) for j in range(d)]
    zero = (Fraction(0),) * d
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for lam in frontier:
            for unit in units:
                cand = tuple((a + b) % 1 for a, b in zip(lam, unit))
                if cand not in seen:
                    seen.add(cand)
                    nxt.append(cand)
        frontier = nxt
    points = []
    for lam in seen:
        if any(lam):
            points.append(to_ints(mat_vec(g, lam)))
    return points


def _chart_simplices(rays: Sequence[NVector], facets: Sequence[NVector], d: int) -> List[Tuple[NVector, ...]]:
    """Pulling triangulation of a pointed cone by its extreme rays."""
    if len(rays) == d:
        return [tuple(rays)]
    apex = rays[0]
    simplices = []
    for f in facets:
        if pairing(f, apex) == 0:
            continue
        on_facet = [r for r in rays if pairing(f, r) == 0]
        if d == 2:
            simplices.append((apex, on_facet[0]))
            continue
        sub_facets = [
            n for n in facets if n != f and rank([f, n]) == 2
        ]
        # the two extreme rays of the 2-dimensional facet
        ends = [r for r in on_facet if any(pairing(n, r) == 0 for n in sub_facets)]
        if len(ends) != 2:
            raise RuntimeError(f"Failed to triangulate facet {f}: rays {on_facet}")
        simplices.append((apex, ends[0], ends[1]))
    return simplices


class PointedCone:
    """
    Rational pointed cone in N given by generators, kept in chart coordinates.

    Raises:
        ValueError: If the generators span a cone containing a line
    """

    __slots__ = ("rays", "dim", "chart", "_facets", "_chart_rays", "_hilbert")

    def __init__(self, generators: Sequence[Sequence[int]]):
        gens = [to_ints(g) for g in generators if any(g)]
        if not gens:
            raise ValueError("cone needs at least one nonzero generator")
        self.chart = lattice_chart(gens)
        self.dim = self.chart.dim
        heads = [to_ints(self.chart.head(g)) for g in gens]
        facets = _chart_facets(heads, self.dim)
        if rank(facets) < self.dim or (self.dim == 1 and len(facets) > 1):
            raise ValueError("cone contains a line")
        self._facets = facets
        self._chart_rays = _chart_extreme_rays(heads, facets, self.dim)
        self.rays = tuple(sorted(to_ints(self.chart.from_head(r)) for r in self._chart_rays))
        self._hilbert = None

    def inequalities(self) -> Tuple[NVector, ...]:
        """Inward facet normals lifted to N* (valid on the span of the cone)."""
        return tuple(self.chart.lift_functional(f) for f in self._facets)

    def equations(self) -> Tuple[NVector, ...]:
        """Functionals vanishing on the span of the cone."""
        return self.chart.trailing_functionals()

    def contains(self, x: Sequence, strict: bool = False) -> bool:
        """Membership test; ``strict`` asks for the relative interior."""
        y = self.chart.to_chart(x)
        if any(c != 0 for c in y[self.dim :]):
            return False
        head = y[: self.dim]
        if strict:
            return all(pairing(f, head) > 0 for f in self._facets)
        return all(pairing(f, head) >= 0 for f in self._facets)

    def head(self, x: Sequence) -> tuple:
        return self.chart.head(x)

    def hilbert_basis(self) -> Tuple[NVector, ...]:
        """
        Minimal generating set of the monoid cone ∩ N, sorted.

        Candidates are the extreme rays and the parallelepiped points of a
        pulling triangulation; reducible candidates are discarded.
        """
        if self._hilbert is not None:
            return self._hilbert
        simplices = _chart_simplices(self._chart_rays, self._facets, self.dim)
        candidates = set(self._chart_rays)
        for simplex in simplices:
            candidates.update(_parallelepiped_points(simplex))
        basis = []
        for x in candidates:
            reducible = False
            for y in candidates:
                if y == x:
                    continue
                z = vsub(x, y)
                if any(z) and all(pairing(f, z) >= 0 for f in self._facets):
                    reducible = True
                    break
            if not reducible:
                basis.append(x)
        self._hilbert = tuple(sorted(to_ints(self.chart.from_head(b)) for b in basis))
        logger.debug(f"Hilbert basis of cone {self.rays}: {len(self._hilbert)} elements")
        return self._hilbert

    def multiplicity(self) -> int:
        """Index of the lattice spanned by the rays in the saturated span (simplicial cones)."""
        if len(self.rays) != self.dim:
            raise ValueError("multiplicity is defined for simplicial cones only")
        return lattice_index(self.rays)


def hilbert_basis(generators: Sequence[Sequence[int]]) -> Tuple[NVector, ...]:
    """
    Hilbert basis of the pointed rational cone spanned by generators.

    Args:
        generators: N-vectors (any dimension of span up to 3)

    Returns:
        Tuple[NVector, ...]: lexicographically sorted minimal generators

    Raises:
        ValueError: If the cone contains a line
    """
    return PointedCone(generators).hilbert_basis()


def cone_inequalities(generators: Sequence[Sequence[int]]) -> Tuple[NVector, ...]:
    """Inward primitive facet normals of the cone, sorted; equations of its span are not included."""
    return tuple(sorted(primitive_direction(f) for f in PointedCone(generators).inequalities()))


def group_by_span(vectors: Sequence[NVector]) -> Dict[NVector, List[NVector]]:
    """Group vectors by their primitive direction."""
    groups: Dict[NVector, List[NVector]] = {}
    for v in vectors:
        groups.setdefault(primitive_part(v)[0], []).append(v)
    return groups
