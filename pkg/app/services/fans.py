"""Normal fans, refinements, Reid's cone tests and torus-invariant divisors."""

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from math import lcm
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from app.config.settings import get_settings
from app.services.exact_lattice import (
    MVector,
    NVector,
    PointedCone,
    common_denominator,
    cross,
    lattice_index,
    pairing,
    primitive_part,
    rank,
    solve,
    to_ints,
    transpose,
    vscale,
)
from app.services.fine_interior import (
    canonical_closure,
    fine_interior,
    is_canonically_closed,
    ord,
    support_set,
    verify_certificate,
)
from app.services.polytope import HalfSpace, Polytope, minkowski_sum, volume

# Configure logger
logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


# ============================================================================
# CONES AND FANS
# ============================================================================


@dataclass(frozen=True)
class Cone:
    """Pointed rational cone stored by its primitive extreme rays."""

    rays: Tuple[NVector, ...]

    @classmethod
    def from_generators(cls, generators: Iterable[Sequence[int]]) -> "Cone":
        """
        Raises:
            ValueError: If the generators span a cone containing a line
        """
        return cls(PointedCone(list(generators)).rays)

    @cached_property
    def _pointed(self) -> PointedCone:
        return PointedCone(self.rays)

    @property
    def dim(self) -> int:
        return self._pointed.dim

    @property
    def is_simplicial(self) -> bool:
        return len(self.rays) == self.dim

    def inequalities(self) -> Tuple[NVector, ...]:
        return self._pointed.inequalities()

    def contains(self, x: Sequence, strict: bool = False) -> bool:
        return self._pointed.contains(x, strict)

    def hilbert_basis(self) -> Tuple[NVector, ...]:
        return self._pointed.hilbert_basis()


@dataclass(frozen=True)
class Fan:
    """Fan stored by its maximal cones, each a sorted tuple of ray indices."""

    rays: Tuple[NVector, ...]
    max_cones: Tuple[Tuple[int, ...], ...]
    complete: bool = True

    @classmethod
    def from_cones(cls, cones: Iterable[Sequence[NVector]], complete: Optional[bool] = None) -> "Fan":
        cones = [tuple(sorted(set(c))) for c in cones]
        rays = tuple(sorted({r for c in cones for r in c}))
        index = {r: i for i, r in enumerate(rays)}
        max_cones = tuple(sorted({tuple(sorted(index[r] for r in c)) for c in cones}))
        fan = cls(rays, max_cones, True)
        if complete is None:
            complete = fan.facets_pair_up()
        return cls(rays, max_cones, complete)

    def cone(self, k: int) -> Cone:
        return Cone(tuple(self.rays[i] for i in self.max_cones[k]))

    def cones(self) -> List[Cone]:
        return [self.cone(k) for k in range(len(self.max_cones))]

    def ray_set(self) -> frozenset:
        return frozenset(self.rays)

    @cached_property
    def _two_faces(self) -> Dict[Tuple[int, int], int]:
        counts: Dict[Tuple[int, int], int] = Counter()
        for idx in self.max_cones:
            cone = Cone(tuple(self.rays[i] for i in idx))
            for f in cone.inequalities():
                tight = [i for i in idx if pairing(f, self.rays[i]) == 0]
                if len(tight) == 2:
                    counts[tuple(sorted(tight))] += 1
        return counts

    def two_cones(self) -> Tuple[Tuple[NVector, NVector], ...]:
        """All 2-dimensional cones, as sorted ray pairs."""
        return tuple(
            (self.rays[i], self.rays[j]) for i, j in sorted(self._two_faces)
        )

    def facets_pair_up(self) -> bool:
        """Every 2-face of a maximal 3-cone lies in exactly two maximal cones."""
        return bool(self._two_faces) and all(n == 2 for n in self._two_faces.values())

    def is_simplicial(self) -> bool:
        return all(len(idx) == 3 for idx in self.max_cones)


# ============================================================================
# CONSTRUCTION
# ============================================================================


def normal_fan(p: Polytope) -> Fan:
    """
    The normal fan of a full-dimensional polytope.

    Raises:
        ValueError: If P is not full-dimensional
    """
    if p.dim != 3:
        raise ValueError(f"normal fan needs a full-dimensional polytope, got dimension {p.dim}")
    cones = [[f.normal for f in p.tight_facets(v)] for v in p.vertices]
    return Fan.from_cones(cones, complete=True)


def _rays_from_inequalities(inequalities: Sequence[NVector]) -> List[NVector]:
    rays = set()
    for a, b in combinations(inequalities, 2):
        c = cross(a, b)
        if not any(c):
            continue
        for cand in (c, tuple(-x for x in c)):
            if all(pairing(f, cand) >= 0 for f in inequalities):
                rays.add(primitive_part(cand)[0])
    return sorted(rays)


def common_refinement(first: Fan, second: Fan) -> Fan:
    """Coarsest common refinement of two complete fans."""
    cones = []
    for a in first.cones():
        for b in second.cones():
            rays = _rays_from_inequalities(a.inequalities() + b.inequalities())
            if rank(rays) == 3:
                cones.append(rays)
    return Fan.from_cones(cones, complete=first.complete and second.complete)


def refines(fine: Fan, coarse: Fan) -> bool:
    """Every maximal cone of ``fine`` lies in a maximal cone of ``coarse``."""
    coarse_cones = coarse.cones()
    for cone in fine.cones():
        if not any(all(c.contains(r) for r in cone.rays) for c in coarse_cones):
            return False
    return True


@lru_cache(maxsize=1024)
def delta_tilde(delta: Polytope) -> Polytope:
    """Δ̃ = C(Δ) + F(Δ)."""
    return minkowski_sum(canonical_closure(delta), fine_interior(delta))


def delta_tilde_fan(delta: Polytope) -> Fan:
    """Σ_Δ̃, the coarsest common refinement of the normal fans of C(Δ) and F(Δ)."""
    return normal_fan(delta_tilde(delta))


# ============================================================================
# SIMPLICIAL REFINEMENT
# ============================================================================


def pulling_triangulation(cone: Cone) -> List[Tuple[NVector, ...]]:
    """Triangulate a 3-cone by pulling from its lexicographically least ray."""
    if cone.is_simplicial:
        return [cone.rays]
    apex = min(cone.rays)
    simplices = []
    for f in cone.inequalities():
        if pairing(f, apex) == 0:
            continue
        on_facet = sorted(r for r in cone.rays if pairing(f, r) == 0)
        simplices.append((apex, on_facet[0], on_facet[1]))
    return simplices


def _stellar_insert(simplices: List[Tuple[NVector, ...]], rho: NVector) -> List[Tuple[NVector, ...]]:
    result = []
    for gens in simplices:
        columns = transpose(gens)
        lam = solve(columns, rho)
        if lam is None or any(x < 0 for x in lam):
            result.append(gens)
            continue
        for i, x in enumerate(lam):
            if x > 0:
                replaced = list(gens)
                replaced[i] = rho
                result.append(tuple(replaced))
    return result


def crepant_simplicial_refinement(fan: Fan, rays: Iterable[NVector]) -> Fan:
    """
    Simplicial refinement of ``fan`` whose ray set is exactly ``rays``.

    Maximal cones are first pulled from their least ray, then the remaining
    rays are inserted stellarly in lexicographic order.

    Raises:
        ValueError: If a ray of the fan is missing from ``rays``
    """
    wanted = sorted(set(tuple(r) for r in rays))
    missing = [r for r in fan.rays if r not in set(wanted)]
    if missing:
        raise ValueError(f"support incomplete: missing {missing}")
    simplices: List[Tuple[NVector, ...]] = []
    for cone in fan.cones():
        simplices.extend(pulling_triangulation(cone))
    present = set(fan.rays)
    for rho in wanted:
        if rho in present:
            continue
        simplices = _stellar_insert(simplices, rho)
        present.add(rho)
    refined = Fan.from_cones(simplices, complete=fan.complete)
    logger.debug(f"Refined fan with {len(fan.rays)} rays to {len(refined.rays)} rays")
    return refined


@lru_cache(maxsize=1024)
def crepant_refinement_of(delta: Polytope) -> Fan:
    """The deterministic crepant refinement of Σ_Δ̃ with ray set S_F(Δ)."""
    closure = canonical_closure(delta)
    return crepant_simplicial_refinement(delta_tilde_fan(closure), support_set(closure).rays)


# ============================================================================
# REID'S CRITERION
# ============================================================================


def _gorenstein_functional(cone: Cone) -> Optional[Tuple[Fraction, ...]]:
    """Chart functional equal to 1 on every generator, if it exists."""
    pointed = cone._pointed
    heads = [pointed.head(r) for r in cone.rays]
    d = pointed.dim
    basis = []
    for h in heads:
        if rank(basis + [h]) > len(basis):
            basis.append(h)
        if len(basis) == d:
            break
    m = solve(basis, [1] * d)
    if m is None:
        return None
    if any(pairing(m, h) != 1 for h in heads):
        return None
    return m


def reid_witness(cone: Cone) -> Optional[Tuple[NVector, int]]:
    """
    Primitive m in M and level j with <m, g> = j on every generator.

    Returns:
        Optional[Tuple[NVector, int]]: (m lifted to M, j), or None if the cone
        is not Q-Gorenstein
    """
    m = _gorenstein_functional(cone)
    if m is None:
        return None
    j = common_denominator([m])
    chart_m = to_ints(vscale(j, m))
    lifted = cone._pointed.chart.lift_functional(chart_m)
    return lifted, j


def _levels(cone: Cone) -> Optional[List[Tuple[NVector, Fraction]]]:
    m = _gorenstein_functional(cone)
    if m is None:
        return None
    pointed = cone._pointed
    return [(h, pairing(m, pointed.head(h))) for h in cone.hilbert_basis()]


def cone_is_canonical(cone: Cone) -> bool:
    """Reid: a functional equal to 1 on the generators is >= 1 on all nonzero lattice points."""
    levels = _levels(cone)
    return levels is not None and all(level >= 1 for _, level in levels)


def cone_is_terminal(cone: Cone) -> bool:
    """Reid: as canonical, with strict inequality away from the generators."""
    levels = _levels(cone)
    if levels is None:
        return False
    generators = set(cone.rays)
    return all(level > 1 or (level == 1 and h in generators) for h, level in levels)


def cone_multiplicity(cone: Cone) -> int:
    """
    Index of the lattice spanned by the rays of a simplicial cone.

    Raises:
        ValueError: If the cone is not simplicial
    """
    if not cone.is_simplicial:
        raise ValueError("multiplicity is defined for simplicial cones only")
    return lattice_index(cone.rays)


# ============================================================================
# DIVISORS
# ============================================================================


@dataclass(frozen=True)
class TorusDivisor:
    """Torus-invariant Q-divisor: one coefficient per ray, in ray order."""

    rays: Tuple[NVector, ...]
    coefficients: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.rays) != len(self.coefficients):
            raise ValueError("divisor needs one coefficient per ray")
        object.__setattr__(self, "coefficients", tuple(Fraction(a) for a in self.coefficients))

    def coefficient(self, ray: Sequence[int]) -> Fraction:
        return self.coefficients[self.rays.index(tuple(ray))]

    def scale(self, k) -> "TorusDivisor":
        return TorusDivisor(self.rays, tuple(k * a for a in self.coefficients))

    def __add__(self, other: "TorusDivisor") -> "TorusDivisor":
        if self.rays != other.rays:
            raise ValueError("divisors live on different fans")
        return TorusDivisor(self.rays, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def polytope_halfspaces(self) -> List[HalfSpace]:
        """Halfspaces <x, ν_i> >= -a_i cutting out P_D."""
        return [HalfSpace(r, -a) for r, a in zip(self.rays, self.coefficients)]


def canonical_divisor(fan: Fan) -> TorusDivisor:
    """K = -Σ D_i."""
    return TorusDivisor(fan.rays, tuple(-1 for _ in fan.rays))


def divisor_from_ord(p: Polytope, fan: Fan) -> TorusDivisor:
    """The divisor -Σ ord_P(ν_i) D_i of P on the fan."""
    return TorusDivisor(fan.rays, tuple(-ord(p, r) for r in fan.rays))


def cartier_data(divisor: TorusDivisor, fan: Fan) -> Optional[Dict[Tuple[int, ...], MVector]]:
    """
    Local linear data m_σ with <m_σ, ν_i> = -a_i on the rays of every maximal cone.

    Returns:
        Optional[Dict]: m_σ per maximal cone, or None if some cone admits none
    """
    data = {}
    for idx in fan.max_cones:
        rays = [fan.rays[i] for i in idx]
        values = [-divisor.coefficient(r) for r in rays]
        chosen_rays, chosen_values = [], []
        for r, v in zip(rays, values):
            if rank(chosen_rays + [r]) > len(chosen_rays):
                chosen_rays.append(r)
                chosen_values.append(v)
        if len(chosen_rays) < 3:
            return None
        m = solve(chosen_rays, chosen_values)
        if m is None or any(pairing(m, r) != v for r, v in zip(rays, values)):
            return None
        data[idx] = m
    return data


def is_q_cartier(divisor: TorusDivisor, fan: Fan) -> Optional[int]:
    """
    Cartier index of a Q-Cartier divisor (None if not Q-Cartier).

    Raises:
        RuntimeError: If the index exceeds the configured cap
    """
    data = cartier_data(divisor, fan)
    if data is None:
        return None
    index = lcm(*(Fraction(c).denominator for m in data.values() for c in m), 1)
    cap = get_settings().q_cartier_cap
    if index > cap:
        logger.error(f"Q-Cartier index {index} exceeds cap {cap}")
        raise RuntimeError(f"Failed to bound Cartier index: {index} exceeds {cap}")
    return index


def is_basepointfree(divisor: TorusDivisor, fan: Fan) -> bool:
    """
    A Cartier divisor is basepointfree iff every m_σ lies in P_D.

    Raises:
        ValueError: If the divisor is not Cartier
    """
    data = cartier_data(divisor, fan)
    if data is None or is_q_cartier(divisor, fan) != 1:
        raise ValueError("divisor is not Cartier")
    halfspaces = divisor.polytope_halfspaces()
    return all(all(h.contains(m) for h in halfspaces) for m in data.values())


def self_intersection_top(p: Polytope) -> Fraction:
    """D³ = 3!·vol(P_D) for the ample divisor with polytope P_D."""
    return 6 * volume(p)


# ============================================================================
# CREPANCY
# ============================================================================


def crepancy_check(delta: Polytope) -> bool:
    """
    Check that ord_F - ord_Δ is exactly 1 on S_F(Δ), at least 1 everywhere,
    and that Σ_Δ̃ has all its rays in S_F(Δ).

    Raises:
        ValueError: If Δ is not canonically closed
    """
    if not is_canonically_closed(delta):
        raise ValueError("crepancy check needs a canonically closed polytope")
    inner = fine_interior(delta)
    support = support_set(delta)
    if any(ord(inner, nu) - ord(delta, nu) != 1 for nu in support):
        return False
    if not verify_certificate(delta, inner):
        return False
    return set(delta_tilde_fan(delta).rays) <= set(support.rays)


# ============================================================================
# EXPORT
# ============================================================================


def fan_to_json(fan: Fan) -> dict:
    return {
        "rays": [list(r) for r in fan.rays],
        "max_cones": [list(c) for c in fan.max_cones],
    }


def fan_to_dot(fan: Fan, name: str = "fan") -> str:
    """DOT graph of rays joined along the 2-cones of the fan."""
    lines = [f"graph {name} {{"]
    for i, r in enumerate(fan.rays):
        label = ",".join(str(x) for x in r)
        lines.append(f'  r{i} [label="({label})"];')
    index = {r: i for i, r in enumerate(fan.rays)}
    for a, b in fan.two_cones():
        lines.append(f"  r{index[a]} -- r{index[b]};")
    lines.append("}")
    return "\n".join(lines) + "\n"

