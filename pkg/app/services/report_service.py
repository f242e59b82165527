"""Assemble pydantic reports from the computational services."""

import logging
from typing import Iterable, Optional, Sequence

from app.services.atlas_service import (
    Atlas,
    AtlasEntry,
    CoarseningResult,
    CoverInvariants,
    DegenerationSplit,
    classify_polytope,
    component_K2,
    component_singularities,
    entry_vertices,
)
from app.services.fine_interior import canonical_closure, fine_interior_result, support_set
from app.services.fans import self_intersection_top
from app.services.hypersurface import LITERATURE_CONSTANTS, invariants, singularity_report
from app.services.polytope import (
    Polytope,
    denominator_index,
    is_canonical_fano,
    is_reflexive,
    num_interior_points,
    num_lattice_points,
)
from app.utils.ade_labels import ambient_pairs, format_labels
from app.utils.rational_codec import format_rational, format_vector, polytope_to_json
from src.schemas.models import (
    AnalysisReport,
    AtlasEntryModel,
    CheckResult,
    CoarseningReport,
    CoverReport,
    DegenerationSplitModel,
    FacetPresentationModel,
    FineInteriorReport,
    InvariantsModel,
    SingularityReportModel,
    SplitComponentModel,
    VerificationSummary,
)

# Configure logger
logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


def facet_presentation(p: Polytope) -> FacetPresentationModel:
    return FacetPresentationModel(**polytope_to_json(p))


def fine_interior_report(delta: Polytope) -> FineInteriorReport:
    """
    Fine interior, support set and canonical closure of Δ.

    Support and closure are omitted when the Fine interior is empty.
    """
    result = fine_interior_result(delta)
    if result.is_empty:
        return FineInteriorReport(
            fine_interior=facet_presentation(result.polytope),
            cut_rounds=result.rounds,
        )
    closure = canonical_closure(delta)
    return FineInteriorReport(
        fine_interior=facet_presentation(result.polytope),
        support=[list(r) for r in support_set(delta)],
        canonical_closure=facet_presentation(closure),
        canonically_closed=closure == delta,
        index_m=denominator_index(result.polytope),
        cut_rounds=result.rounds,
    )


def invariants_model(delta: Polytope) -> InvariantsModel:
    """Computed invariants plus the literature constants of the matching Kanev family."""
    inv = invariants(delta)
    literature = LITERATURE_CONSTANTS.get(inv.K2, {}) if inv.p_g == 1 else {}
    return InvariantsModel(
        p_g=inv.p_g,
        q=inv.q,
        kappa=inv.kappa,
        K2=inv.K2,
        index_m=inv.index_m,
        plurigenera=list(inv.plurigenera),
        chi=inv.chi,
        h11=literature.get("h11"),
        pi1=literature.get("pi1"),
        abstract_generic_rho=literature.get("abstract_generic_rho"),
    )


def singularity_model(delta: Polytope) -> SingularityReportModel:
    report = singularity_report(delta)
    return SingularityReportModel(
        ambient=ambient_pairs(label for label, k in report.ambient.items() for _ in range(k)),
        fixed_point=report.fixed_point.label(),
        flagged_edges=len(report.fixed_point.flagged_edges),
        canonical_rdp=report.canonical_rdp,
        picard_generic=report.picard_generic,
    )


def analysis_report(delta: Polytope, atlas: Optional[Atlas] = None) -> AnalysisReport:
    """
    End-to-end analysis: Fine interior, closure, invariants and singularities.

    Args:
        delta: Full-dimensional lattice polytope
        atlas: When given, the Fine interior is classified against its types

    Raises:
        ValueError: If Δ is not a full-dimensional lattice polytope
    """
    if not delta.is_lattice:
        raise ValueError("input is not a lattice polytope")
    if delta.dim != 3:
        raise ValueError("not full-dimensional")
    fine = fine_interior_report(delta)
    inner = fine_interior_result(delta).polytope

    fine_class = None
    if atlas is not None and inner.dim == 3:
        try:
            fine_class = classify_polytope(delta, atlas)
        except ValueError:
            logger.debug(f"Fine interior of {delta} matches no atlas type")

    singularities = singularity_model(delta) if inner.dim == 3 else None
    report = AnalysisReport(
        polytope=facet_presentation(delta),
        lattice_points=num_lattice_points(delta),
        interior_points=num_interior_points(delta),
        reflexive=is_reflexive(delta),
        canonical_fano=is_canonical_fano(delta),
        fine_interior=fine,
        fine_interior_class=fine_class,
        invariants=invariants_model(delta),
        singularities=singularities,
    )
    logger.info(f"Analyzed polytope with {len(delta.vertices)} vertices: F(Δ) has dimension {inner.dim}")
    return report


# ============================================================================
# ATLAS REPORTS
# ============================================================================


def atlas_entry_model(entry: AtlasEntry) -> AtlasEntryModel:
    return AtlasEntryModel(
        id=entry.id,
        fine_class=entry.fine_class,
        span=list(entry.span),
        vertices=entry_vertices(entry),
        lattice_points=entry.expected.lattice_points,
        ambient=format_labels(entry.expected.ambient),
        canonical=format_labels(entry.expected.canonical),
        picard=entry.expected.picard,
        closure=entry.closure,
        q_cartier=entry.expected.q_cartier,
    )


def split_model(entry: AtlasEntry, split: DegenerationSplit) -> DegenerationSplitModel:
    components = [
        SplitComponentModel(
            vertices=[format_vector(v) for v in part.vertices],
            K2=format_rational(component_K2(part)),
            top_intersection=format_rational(self_intersection_top(part)),
            singularities=component_singularities(part),
        )
        for part in split.components
    ]
    return DegenerationSplitModel(
        entry_id=entry.id,
        plane_normal=list(split.plane_normal),
        shared_vertices=[format_vector(v) for v in split.shared.vertices],
        shared_reflexive=split.shared_reflexive,
        components=components,
    )


def cover_model(entry: AtlasEntry, cover: CoverInvariants) -> CoverReport:
    return CoverReport(
        entry_id=entry.id,
        interior_points=cover.interior_points,
        adjoint_interior_points=cover.adjoint_interior_points,
        p_g=cover.p_g,
        K2=cover.K2,
        quadric_points=[list(p) for p in cover.quadric_points],
        quadric_relation=cover.quadric_relation,
    )


def coarsening_model(result: CoarseningResult, axis: int, factor: int, entry_id: Optional[str] = None) -> CoarseningReport:
    return CoarseningReport(
        entry_id=entry_id,
        axis=axis,
        factor=factor,
        dropped=[list(p) for p in result.dropped],
        kept=len(result.kept),
        vertices=[format_vector(v) for v in result.image.vertices],
        reflexive=result.reflexive,
    )


def summarize(results: Iterable[CheckResult], entry_ids: Sequence[str]) -> VerificationSummary:
    """Counts of passing and failing checks; an entry is verified when all its checks pass."""
    results = list(results)
    failed_entries = {r.entry_id for r in results if not r.passed}
    return VerificationSummary(
        entries_total=len(entry_ids),
        entries_verified=sum(1 for i in entry_ids if i not in failed_entries),
        checks_passed=sum(1 for r in results if r.passed),
        checks_failed=sum(1 for r in results if not r.passed),
        results=results,
    )


# ============================================================================
# MARKDOWN
# ============================================================================


def analysis_markdown(report: AnalysisReport) -> str:
    inv = report.invariants
    lines = [
        "# Polytope analysis",
        "",
        f"- vertices: {report.polytope.vertices}",
        f"- lattice points: {report.lattice_points}, interior: {report.interior_points}",
        f"- reflexive: {report.reflexive}, canonical Fano: {report.canonical_fano}",
        f"- Fine interior: {report.fine_interior.fine_interior.vertices}",
        f"- Fine-interior type: {report.fine_interior_class.value if report.fine_interior_class else '-'}",
        f"- p_g = {inv.p_g}, q = {inv.q}, κ = {inv.kappa}, K² = {inv.K2}, m = {inv.index_m}",
        f"- sections |nF ∩ M|, n = 1..3: {inv.plurigenera}",
    ]
    if report.singularities is not None:
        s = report.singularities
        ambient = "+".join(f"{k}{label}" if k > 1 else label for label, k in s.ambient) or "-"
        lines += [
            f"- singularities of Z_Δ̃: {ambient}",
            f"- fixed-point Dynkin graph: {s.fixed_point or '-'}",
            f"- canonical model RDPs: {format_labels(s.canonical_rdp) or '-'}",
            f"- generic Picard number: {s.picard_generic}",
        ]
    return "\n".join(lines) + "\n"


def verification_lines(summary: VerificationSummary) -> str:
    """One line per check, then the entry tally."""
    lines = []
    for r in summary.results:
        if r.passed:
            lines.append(f"PASS {r.entry_id} {r.check}")
        else:
            lines.append(f"FAIL {r.entry_id} {r.check}: expected {r.expected}, got {r.got}")
    lines.append(
        f"{summary.entries_verified}/{summary.entries_total} entries verified "
        f"({summary.checks_passed} checks passed, {summary.checks_failed} failed)"
    )
    return "\n".join(lines) + "\n"
