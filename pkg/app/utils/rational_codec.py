"""JSON encoding of exact rationals, vectors and polytopes."""

import json
from fractions import Fraction
from typing import Any, Dict, List, Sequence, Union

from app.services.polytope import HalfSpace, Polytope, convex_hull

JsonRational = Union[int, str]


def parse_rational(value: Any) -> Fraction:
    """
    Parse an int or a "p/q" string into a Fraction.

    Raises:
        ValueError: If the value is not an exact rational
    """
    if isinstance(value, bool):
        raise ValueError(f"Invalid rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"Invalid rational: {value!r}") from e
    raise ValueError(f"Invalid rational: {value!r} (floats are not accepted)")


def format_rational(value: Fraction) -> JsonRational:
    """Integers stay integers, everything else becomes "p/q"."""
    value = Fraction(value)
    if value.denominator == 1:
        return int(value)
    return f"{value.numerator}/{value.denominator}"


def parse_vector(values: Sequence[Any], dim: int = 3) -> tuple:
    if len(values) != dim:
        raise ValueError(f"Expected {dim} coordinates, got {len(values)}")
    return tuple(parse_rational(v) for v in values)


def format_vector(v: Sequence) -> List[JsonRational]:
    return [format_rational(c) for c in v]


def halfspace_to_json(h: HalfSpace) -> Dict[str, Any]:
    return {"normal": list(h.normal), "level": format_rational(h.level)}


def polytope_to_json(p: Polytope) -> Dict[str, Any]:
    """Vertex and facet presentation of a polytope."""
    return {
        "dim": p.dim,
        "vertices": [format_vector(v) for v in p.vertices],
        "facets": [halfspace_to_json(f) for f in p.facets],
        "equations": [halfspace_to_json(e) for e in p.equations],
    }


def polytope_from_json(data: Dict[str, Any]) -> Polytope:
    """
    Build a polytope from ``{"vertices": [[x, y, z], ...]}``.

    Raises:
        ValueError: If the vertex list is missing, empty or malformed
    """
    vertices = data.get("vertices") if isinstance(data, dict) else None
    if not isinstance(vertices, list) or not vertices:
        raise ValueError("Polytope JSON needs a non-empty 'vertices' list")
    return convex_hull(parse_vector(v) for v in vertices)


def dumps(payload: Any) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
