"""Request, report and job models for the toolkit's JSON surfaces."""

from datetime import datetime
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, field_validator

from app.utils.rational_codec import parse_rational


# ============================================================================
# ENUMS
# ============================================================================

class FineInteriorClass(str, Enum):
    """The five Fine-interior types of the atlas."""
    A = "a"
    B = "b"
    C = "c"
    D = "d"
    E = "e"


class OutputFormat(str, Enum):
    """Report output formats."""
    JSON = "json"
    MARKDOWN = "markdown"


class JobStatus(str, Enum):
    """Verification job status."""
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


# ============================================================================
# POLYTOPE MODELS
# ============================================================================

class PolytopeModel(BaseModel):
    """Polytope given by spanning points; coordinates are ints or "p/q" strings."""
    vertices: List[List[Union[int, str]]] = Field(..., min_length=1, description="Spanning points in M")

    @field_validator("vertices")
    @classmethod
    def check_coordinates(cls, vertices):
        for v in vertices:
            if len(v) != 3:
                raise ValueError(f"Point {v} must have 3 coordinates")
            for c in v:
                parse_rational(c)
        return vertices

    class Config:
        """Pydantic configuration."""
        json_schema_extra = {
            "example": {
                "vertices": [[2, 1, -2], [2, 0, 1], [2, 2, 1], [-4, -2, 1]]
            }
        }


class HalfSpaceModel(BaseModel):
    """Inequality <x, normal> >= level."""
    normal: List[int] = Field(..., description="Primitive inward normal")
    level: Union[int, str] = Field(..., description="Exact level")


class FacetPresentationModel(BaseModel):
    """Vertices together with the irredundant facet presentation."""
    dim: int = Field(..., ge=-1, le=3, description="Dimension, -1 when empty")
    vertices: List[List[Union[int, str]]] = Field(default_factory=list, description="Vertices")
    facets: List[HalfSpaceModel] = Field(default_factory=list, description="Facet halfspaces")
    equations: List[HalfSpaceModel] = Field(default_factory=list, description="Affine hull equations")


class FanModel(BaseModel):
    """Fan given by rays and maximal cones as ray indices."""
    rays: List[List[int]] = Field(..., description="Primitive rays")
    max_cones: List[List[int]] = Field(..., description="Maximal cones as indices into rays")


# ============================================================================
# REPORT MODELS
# ============================================================================

class InvariantsModel(BaseModel):
    """Numerical invariants of the hypersurface."""
    p_g: int = Field(..., description="Geometric genus l*(Δ)")
    q: int = Field(0, description="Irregularity")
    kappa: int = Field(..., ge=-1, le=2, description="Kodaira dimension")
    K2: Optional[int] = Field(None, description="K² of the minimal model")
    index_m: Optional[int] = Field(None, description="Least m with m·F(Δ) a lattice polytope")
    plurigenera: List[int] = Field(default_factory=list, description="|nF ∩ M| for n = 1..3")
    chi: int = Field(..., description="Holomorphic Euler characteristic")
    h11: Optional[int] = Field(None, description="Literature value of h^{1,1}")
    pi1: Optional[str] = Field(None, description="Literature fundamental group")
    abstract_generic_rho: Optional[int] = Field(None, description="Literature generic Picard number")


class SingularityReportModel(BaseModel):
    """Singularities of the ambient hypersurface and of the canonical model."""
    ambient: List[Tuple[str, int]] = Field(default_factory=list, description="(A_k label, count) pairs")
    fixed_point: str = Field("", description="ADE label of the fixed-point Dynkin graph")
    flagged_edges: int = Field(0, description="Dynkin edges of multiplicity > 1")
    canonical_rdp: List[str] = Field(default_factory=list, description="RDP labels of the canonical model")
    picard_generic: int = Field(..., description="1 + total RDP rank")

    class Config:
        """Pydantic configuration."""
        json_schema_extra = {
            "example": {
                "ambient": [["A2", 3], ["A1", 1]],
                "fixed_point": "E6",
                "flagged_edges": 0,
                "canonical_rdp": ["E6", "A2"],
                "picard_generic": 9
            }
        }


class FineInteriorReport(BaseModel):
    """Fine interior with its support set and canonical closure."""
    fine_interior: FacetPresentationModel = Field(..., description="F(Δ)")
    support: List[List[int]] = Field(default_factory=list, description="S_F(Δ), sorted")
    canonical_closure: Optional[FacetPresentationModel] = Field(None, description="C(Δ)")
    canonically_closed: Optional[bool] = Field(None, description="Whether C(Δ) = Δ")
    index_m: Optional[int] = Field(None, description="Denominator index of F(Δ)")
    cut_rounds: int = Field(..., description="Rounds of the certified cutting-plane loop")


class AnalysisReport(BaseModel):
    """End-to-end analysis of one polytope."""
    polytope: FacetPresentationModel = Field(..., description="Input hull")
    lattice_points: int = Field(..., description="l(Δ)")
    interior_points: int = Field(..., description="l*(Δ)")
    reflexive: bool = Field(..., description="Whether Δ is reflexive")
    canonical_fano: bool = Field(..., description="Whether Δ is a canonical Fano polytope")
    fine_interior: FineInteriorReport = Field(..., description="Fine interior data")
    fine_interior_class: Optional[FineInteriorClass] = Field(None, description="Atlas type of F(Δ)")
    invariants: InvariantsModel = Field(..., description="Hypersurface invariants")
    singularities: Optional[SingularityReportModel] = Field(None, description="Absent when F(Δ) is not 3-dimensional")


# ============================================================================
# ATLAS MODELS
# ============================================================================

class AtlasEntryModel(BaseModel):
    """One atlas row with its expected table columns."""
    id: str = Field(..., description="Classification identifier")
    fine_class: FineInteriorClass = Field(..., alias="class", description="Fine-interior type")
    span: List[str] = Field(..., description="Names of the spanning points")
    vertices: List[List[int]] = Field(..., description="Vertices of the hull")
    lattice_points: Optional[int] = Field(None, description="Expected l(Δ)")
    ambient: str = Field(..., description="Expected singularities of the ambient hypersurface")
    canonical: str = Field(..., description="Expected singularities of the canonical model")
    picard: int = Field(..., description="Expected generic Picard number")
    closure: Optional[str] = Field(None, description="Id of the canonical closure for non-closed rows")
    q_cartier: Optional[bool] = Field(None, description="Whether D_can is expected to be Q-Cartier")

    class Config:
        """Pydantic configuration."""
        populate_by_name = True
        json_schema_extra = {
            "example": {
                "id": "534866",
                "class": "a",
                "span": ["can", "b1", "a1", "d1"],
                "vertices": [[-1, -1, 1], [-1, 0, 1], [0, 0, -1], [2, 0, 1], [2, 1, -2], [2, 2, 1]],
                "lattice_points": 15,
                "ambient": "3A2+A1",
                "canonical": "E6+A2",
                "picard": 9,
                "closure": None,
                "q_cartier": True
            }
        }


class CheckResult(BaseModel):
    """Outcome of one verification check."""
    entry_id: str = Field(..., description="Atlas id, or 'atlas' for global checks")
    check: str = Field(..., description="Check name")
    passed: bool = Field(..., description="Whether the check passed")
    expected: Optional[str] = Field(None, description="Expected value")
    got: Optional[str] = Field(None, description="Computed value")


class VerificationSummary(BaseModel):
    """Aggregated verification outcome."""
    entries_total: int = Field(..., description="Number of atlas entries")
    entries_verified: int = Field(..., description="Entries whose checks all passed")
    checks_passed: int = Field(..., description="Number of passing checks")
    checks_failed: int = Field(..., description="Number of failing checks")
    results: List[CheckResult] = Field(default_factory=list, description="All check results in atlas order")

    @property
    def passed(self) -> bool:
        return self.checks_failed == 0


class SplitComponentModel(BaseModel):
    """One component of a symmetry-plane degeneration."""
    vertices: List[List[int]] = Field(..., description="Vertices of the component simplex")
    K2: Union[int, str] = Field(..., description="K² of the component surface")
    top_intersection: Union[int, str] = Field(..., description="6·vol of the component")
    singularities: Dict[str, int] = Field(default_factory=dict, description="A_k counts of the component")


class DegenerationSplitModel(BaseModel):
    """Subdivision of a maximal polytope at its plane of symmetry."""
    entry_id: str = Field(..., description="Atlas id of the maximal polytope")
    plane_normal: List[int] = Field(..., description="Primitive normal of the cutting plane")
    shared_vertices: List[List[int]] = Field(..., description="Vertices of Δ1 ∩ Δ2")
    shared_reflexive: bool = Field(..., description="Whether Δ1 ∩ Δ2 is reflexive")
    components: List[SplitComponentModel] = Field(..., description="Δ1 and Δ2")


class CoverReport(BaseModel):
    """Invariants of the double cover from the lattice refinement."""
    entry_id: str = Field(..., description="Atlas id (class c, d or e)")
    interior_points: int = Field(..., description="l*(Δ')")
    adjoint_interior_points: int = Field(..., description="l*(Δ'_can)")
    p_g: int = Field(..., description="Geometric genus of the cover")
    K2: int = Field(..., description="K² of the cover")
    quadric_points: List[List[int]] = Field(..., description="Lattice points of 2·F_can")
    quadric_relation: bool = Field(..., description="Points collinear and equally spaced")


class CoarseningReport(BaseModel):
    """Image of a polytope under an index-k lattice coarsening."""
    entry_id: Optional[str] = Field(None, description="Atlas id, if any")
    axis: int = Field(..., ge=0, le=2, description="Coarsened coordinate")
    factor: int = Field(..., ge=1, description="Index of the sublattice")
    dropped: List[List[int]] = Field(default_factory=list, description="Lattice points outside the sublattice")
    kept: int = Field(..., description="Number of kept lattice points")
    vertices: List[List[int]] = Field(..., description="Vertices of the image")
    reflexive: bool = Field(..., description="Whether the image is reflexive")


# ============================================================================
# JOB MODELS
# ============================================================================

class VerificationJobModel(BaseModel):
    """Atlas verification job record."""
    job_id: str = Field(..., description="Unique job identifier")
    job_type: str = Field(..., description="Type of job (atlas_verification)")
    status: JobStatus = Field(default=JobStatus.RUNNING, description="Job status")

    started_at: datetime = Field(default_factory=datetime.utcnow, description="Job start time")
    completed_at: Optional[datetime] = Field(None, description="Job completion time")

    entries_processed: int = Field(default=0, description="Number of entries verified")
    entries_failed: int = Field(default=0, description="Entries with at least one failing check")
    workers: int = Field(default=1, description="Worker processes used")

    errors: List[str] = Field(default_factory=list, description="List of errors encountered")
    execution_time_ms: Optional[float] = Field(None, description="Execution time in milliseconds")

    class Config:
        """Pydantic configuration."""
        json_schema_extra = {
            "example": {
                "job_id": "JOB-20250101-120000-1a2b3c4d",
                "job_type": "atlas_verification",
                "status": "completed",
                "entries_processed": 49,
                "entries_failed": 0
            }
        }
