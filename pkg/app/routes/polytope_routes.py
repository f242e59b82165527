"""Polytope analysis routes."""

import logging

from fastapi import APIRouter, HTTPException, status

from app.services.atlas_service import load_atlas
from app.services.polytope import Polytope, convex_hull
from app.services.report_service import analysis_report, fine_interior_report
from app.utils.rational_codec import parse_vector
from src.schemas.models import AnalysisReport, FineInteriorReport, PolytopeModel

# Configure logger
logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

router = APIRouter(prefix="/api/polytopes", tags=["Polytopes"])


# ============================================================================
# HELPER FUNCTIONS
# ============================================================================


def model_to_polytope(payload: PolytopeModel) -> Polytope:
    """
    Convex hull of the request's spanning points.

    Raises:
        HTTPException: 400 if the points are not lattice points
    """
    try:
        delta = convex_hull(parse_vector(v) for v in payload.vertices)
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    if not delta.is_lattice:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail="input is not a lattice polytope")
    return delta


# ============================================================================
# POLYTOPE ENDPOINTS
# ============================================================================


@router.post(
    "/analyze",
    response_model=AnalysisReport,
    status_code=status.HTTP_200_OK,
    summary="Analyze a polytope",
    description="Fine interior, canonical closure, invariants and singularities of a lattice 3-tope.",
)
def analyze_polytope(payload: PolytopeModel):
    """
    Full analysis report of the hull of the given points.

    Raises:
        HTTPException: 400 for invalid polytopes, 500 if the computation fails
    """
    delta = model_to_polytope(payload)
    try:
        return analysis_report(delta, load_atlas())
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except Exception as e:
        logger.error(f"Error analyzing polytope: {e}", exc_info=True)
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Failed to analyze polytope: {str(e)}",
        )


@router.post(
    "/fine-interior",
    response_model=FineInteriorReport,
    status_code=status.HTTP_200_OK,
    summary="Fine interior of a polytope",
)
def fine_interior_endpoint(payload: PolytopeModel):
    delta = model_to_polytope(payload)
    try:
        return fine_interior_report(delta)
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    except Exception as e:
        logger.error(f"Error computing Fine interior: {e}", exc_info=True)
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Failed to compute Fine interior: {str(e)}",
        )
