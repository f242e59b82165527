"""Order function, Fine interior with a sufficiency certificate, support set and canonical closure."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import ceil, floor
from typing import Iterator, List, Sequence, Set, Tuple

from app.config.settings import get_settings
from app.services.exact_lattice import MVector, NVector, PointedCone, pairing, vscale, vsub
from app.services.polytope import (
    HalfSpace,
    Polytope,
    contains,
    from_halfspaces,
    minimum,
    minkowski_sum,
)

# Configure logger
logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


# ============================================================================
# TYPES
# ============================================================================


@dataclass(frozen=True)
class CertifiedCone:
    """
    A maximal cone of the common refinement of the normal fans of F and Δ.

    On this cone ord_F(ν) - ord_Δ(ν) = <witness, ν>; the certificate holds
    when the witness pairs to at least 1 with every Hilbert basis element.
    """

    rays: Tuple[NVector, ...]
    witness: MVector
    hilbert_basis: Tuple[NVector, ...]

    def holds(self) -> bool:
        return all(pairing(self.witness, h) >= 1 for h in self.hilbert_basis)


@dataclass(frozen=True)
class FineInteriorResult:
    """Fine interior together with the cuts and certificate that produced it."""

    polytope: Polytope
    cuts: Tuple[HalfSpace, ...]
    certificate: Tuple[CertifiedCone, ...]
    rounds: int

    @property
    def is_empty(self) -> bool:
        return self.polytope.is_empty


@dataclass(frozen=True)
class SupportSet:
    """Primitive ν with ord_F(ν) = ord_Δ(ν) + 1, sorted lexicographically."""

    rays: Tuple[NVector, ...]

    def __iter__(self) -> Iterator[NVector]:
        return iter(self.rays)

    def __len__(self) -> int:
        return len(self.rays)

    def __contains__(self, nu: object) -> bool:
        return tuple(nu) in self.rays


# ============================================================================
# ORDER FUNCTION
# ============================================================================


def ord(p: Polytope, nu: Sequence[int]) -> Fraction:
    """
    ord_P(ν): the minimum of <x, ν> over P.

    Raises:
        ValueError: If P is empty
    """
    return minimum(p, nu)


# ============================================================================
# FINE INTERIOR
# ============================================================================


def _decompose(s: MVector, delta: Polytope, inner: Polytope) -> Tuple[MVector, MVector]:
    for v in delta.vertices:
        w = vsub(s, v)
        if w in inner.vertices:
            return v, w
    raise RuntimeError(f"Failed to decompose Minkowski vertex {s}")


def _certify(delta: Polytope, inner: Polytope) -> Tuple[List[CertifiedCone], Set[NVector]]:
    """
    Certified cones of Δ + F' and the Hilbert basis elements violating them.

    Each vertex s = v + w of the Minkowski sum owns the normal cone on which
    ord_F' - ord_Δ equals <w - v, ·>.
    """
    total = minkowski_sum(delta, inner)
    cones = []
    violations: Set[NVector] = set()
    for s in total.vertices:
        v, w = _decompose(s, delta, inner)
        generators = [f.normal for f in total.tight_facets(s)]
        cone = PointedCone(generators)
        witness = vsub(w, v)
        basis = cone.hilbert_basis()
        for h in basis:
            if pairing(witness, h) < 1:
                violations.add(h)
        cones.append(CertifiedCone(rays=cone.rays, witness=witness, hilbert_basis=basis))
    return cones, violations


def _check_input(delta: Polytope) -> None:
    if not delta.is_lattice:
        raise ValueError("Fine interior needs a lattice polytope")
    if delta.dim < 2:
        raise ValueError(f"Fine interior needs dimension 2 or 3, got {delta.dim}")


@lru_cache(maxsize=1024)
def fine_interior_result(delta: Polytope) -> FineInteriorResult:
    """
    Compute F(Δ) by a certified cutting-plane loop.

    Starts from the facets of Δ moved inward by one and adds every Hilbert
    basis element at which the current candidate violates ord_F >= ord_Δ + 1,
    until the candidate certifies itself.

    Args:
        delta: Lattice polytope of dimension 2 or 3

    Returns:
        FineInteriorResult: the Fine interior (possibly empty) with its certificate

    Raises:
        ValueError: If Δ is not a lattice polytope of dimension 2 or 3
        RuntimeError: If the loop exceeds the configured round limit
    """
    _check_input(delta)
    max_rounds = get_settings().max_cut_rounds
    cuts = {HalfSpace(f.normal, f.level + 1) for f in delta.facets}
    for rounds in range(1, max_rounds + 1):
        inner = from_halfspaces(cuts, delta.equations)
        if inner.is_empty:
            logger.debug(f"Fine interior of {delta} is empty after {rounds} rounds")
            return FineInteriorResult(inner, tuple(sorted(cuts)), (), rounds)
        cones, violations = _certify(delta, inner)
        if not violations:
            logger.debug(
                f"Fine interior certified after {rounds} rounds with {len(cuts)} cuts "
                f"and {len(cones)} cones"
            )
            return FineInteriorResult(inner, tuple(sorted(cuts)), tuple(cones), rounds)
        for h in violations:
            cuts.add(HalfSpace(h, ord(delta, h) + 1))

    logger.error(f"Fine interior loop for {delta} did not converge in {max_rounds} rounds")
    raise RuntimeError(f"Failed to certify Fine interior: no fixed point after {max_rounds} rounds")


def fine_interior(delta: Polytope) -> Polytope:
    """The Fine interior F(Δ); an empty polytope when the intersection is empty."""
    return fine_interior_result(delta).polytope


def certificate(delta: Polytope) -> Tuple[CertifiedCone, ...]:
    """The certified cones witnessing that no further cut is needed."""
    return fine_interior_result(delta).certificate


def verify_certificate(delta: Polytope, inner: Polytope) -> bool:
    """
    Independently re-check that ``inner`` is the Fine interior of Δ.

    Every cut must sit at level ord_Δ + 1, the cuts must cut out ``inner``,
    and ord_inner - ord_Δ must be at least 1 on the Hilbert basis of every
    cone of the common refinement.
    """
    result = fine_interior_result(delta)
    for cut in result.cuts:
        if cut.level != ord(delta, cut.normal) + 1:
            logger.warning(f"Cut {cut} is not at level ord + 1")
            return False
    if from_halfspaces(result.cuts, delta.equations) != inner:
        return False
    if inner.is_empty:
        return True
    cones, violations = _certify(delta, inner)
    if violations:
        logger.warning(f"Certificate violated at {sorted(violations)}")
        return False
    return all(c.holds() for c in cones)


# ============================================================================
# SUPPORT SET AND CANONICAL CLOSURE
# ============================================================================


def _slice_points(cone: CertifiedCone) -> Set[NVector]:
    """Lattice points ν of the cone with <witness, ν> = 1."""
    corners = [vscale(Fraction(1) / pairing(cone.witness, r), r) for r in cone.rays]
    lows = [floor(min(c[i] for c in corners)) for i in range(3)]
    highs = [ceil(max(c[i] for c in corners)) for i in range(3)]
    shape = PointedCone(cone.rays)
    found = set()
    for x in range(lows[0], highs[0] + 1):
        for y in range(lows[1], highs[1] + 1):
            for z in range(lows[2], highs[2] + 1):
                nu = (x, y, z)
                if pairing(cone.witness, nu) == 1 and shape.contains(nu):
                    found.add(nu)
    return found


@lru_cache(maxsize=1024)
def support_set(delta: Polytope) -> SupportSet:
    """
    The support S_F(Δ) of the Fine interior.

    Raises:
        ValueError: If the Fine interior is empty
        RuntimeError: If an enumerated vector fails the defining equality
    """
    result = fine_interior_result(delta)
    if result.is_empty:
        raise ValueError("support undefined")
    found: Set[NVector] = set()
    for cone in result.certificate:
        found |= _slice_points(cone)
    for nu in found:
        if ord(result.polytope, nu) != ord(delta, nu) + 1:
            raise RuntimeError(f"Failed to enumerate support: {nu} is not tight")
    logger.debug(f"Support set of {delta} has {len(found)} elements")
    return SupportSet(tuple(sorted(found)))


@lru_cache(maxsize=1024)
def canonical_closure(delta: Polytope) -> Polytope:
    """
    C(Δ): intersection of the halfspaces <x, ν> >= ord_Δ(ν) over ν in S_F(Δ).

    Raises:
        ValueError: If the Fine interior is empty
    """
    support = support_set(delta)
    closure = from_halfspaces(
        [HalfSpace(nu, ord(delta, nu)) for nu in support], delta.equations
    )
    if not contains(closure, delta):
        raise RuntimeError(f"Failed to close {delta}: closure does not contain it")
    return closure


def is_canonically_closed(delta: Polytope) -> bool:
    return canonical_closure(delta) == delta

