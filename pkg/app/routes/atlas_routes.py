"""Read-only routes over the embedded atlas."""

import logging
from typing import List, Optional

from fastapi import APIRouter, HTTPException, Query, status

from app.services.atlas_service import AtlasEntry, load_atlas
from app.services.report_service import analysis_report, atlas_entry_model
from src.schemas.models import AnalysisReport, AtlasEntryModel, FineInteriorClass

# Configure logger
logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

router = APIRouter(prefix="/api/atlas", tags=["Atlas"])


def get_entry_or_404(entry_id: str) -> AtlasEntry:
    try:
        return load_atlas().get(entry_id)
    except KeyError:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Atlas entry {entry_id} not found",
        )


@router.get(
    "",
    response_model=List[AtlasEntryModel],
    response_model_by_alias=True,
    summary="List atlas entries",
)
def list_entries(
    fine_class: Optional[FineInteriorClass] = Query(None, alias="class", description="Filter by Fine-interior type"),
):
    """
    Atlas rows in table order.

    Args:
        fine_class: Optional Fine-interior type filter

    Returns:
        List[AtlasEntryModel]: Entries with their expected columns
    """
    atlas = load_atlas()
    return [
        atlas_entry_model(e)
        for e in atlas.entries
        if fine_class is None or e.fine_class == fine_class.value
    ]


@router.get(
    "/{entry_id}",
    response_model=AtlasEntryModel,
    response_model_by_alias=True,
    summary="Get an atlas entry",
)
def get_entry(entry_id: str):
    return atlas_entry_model(get_entry_or_404(entry_id))


@router.get(
    "/{entry_id}/report",
    response_model=AnalysisReport,
    summary="Computed report of an atlas entry",
)
def get_entry_report(entry_id: str):
    """
    Analysis of the entry's polytope, computed on request.

    Raises:
        HTTPException: 404 for unknown ids, 500 if the computation fails
    """
    entry = get_entry_or_404(entry_id)
    try:
        return analysis_report(entry.polytope, load_atlas())
    except Exception as e:
        logger.error(f"Error computing report for {entry_id}: {e}", exc_info=True)
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Failed to compute report: {str(e)}",
        )
