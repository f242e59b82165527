"""
Atlas verification job.

Runs the per-entry checks of the atlas, optionally across worker processes,
followed by the whole-atlas checks, and assembles the results in atlas order.
"""

import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from app.config import get_settings
from app.services.atlas_service import global_checks, load_atlas, verify_entry
from app.services.job_service import create_job_record, finish_job_record
from app.services.report_service import summarize
from src.schemas.models import CheckResult, VerificationJobModel, VerificationSummary

# Configure logger
logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

EntryOutcome = Tuple[str, List[CheckResult], Optional[str]]


def _verify_one(args: Tuple[str, str]) -> EntryOutcome:
    """Verify one entry; the atlas is loaded (and cached) in the calling process."""
    atlas_path, entry_id = args
    try:
        atlas = load_atlas(atlas_path)
        return entry_id, verify_entry(atlas.get(entry_id), atlas), None
    except Exception as e:
        error_msg = f"Error verifying entry {entry_id}: {e}"
        logger.error(error_msg)
        logger.debug(f"Full traceback:\n{traceback.format_exc()}")
        crash = CheckResult(entry_id=entry_id, check="error", passed=False, got=str(e))
        return entry_id, [crash], error_msg


def run_entry_checks(atlas_path: Path, entry_ids: Sequence[str], jobs: int) -> List[EntryOutcome]:
    """Per-entry outcomes in the order of ``entry_ids``."""
    work = [(str(atlas_path), entry_id) for entry_id in entry_ids]
    if jobs <= 1:
        return [_verify_one(item) for item in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_verify_one, work))


def run_verification(
    atlas_path: Optional[Path] = None,
    jobs: int = 1,
    seed: Optional[int] = None,
    samples: Optional[int] = None,
    box: Optional[int] = None,
    entry_ids: Optional[Sequence[str]] = None,
    include_global: bool = True,
) -> Tuple[VerificationSummary, VerificationJobModel]:
    """
    Verify the atlas and return the summary with its job record.

    Args:
        atlas_path: Atlas file; defaults to the configured path
        jobs: Worker processes for the per-entry checks
        seed: Seed of the random closure-law samples
        samples: Number of random samples
        box: Coordinate box of the random samples
        entry_ids: Restrict the per-entry checks to these ids
        include_global: Whether to run the whole-atlas checks

    Returns:
        Tuple[VerificationSummary, VerificationJobModel]: Results in atlas order and the job record

    Raises:
        KeyError: If a requested id is not in the atlas
    """
    path = Path(atlas_path) if atlas_path is not None else get_settings().atlas_path
    atlas = load_atlas(path)
    ids = list(entry_ids) if entry_ids is not None else [e.id for e in atlas.entries]
    for entry_id in ids:
        atlas.get(entry_id)

    job = create_job_record("atlas_verification", workers=max(1, jobs))
    logger.info(f"Job {job.job_id} started - verifying {len(ids)} atlas entries")

    results: List[CheckResult] = []
    errors: List[str] = []
    outcomes = run_entry_checks(path, ids, jobs)
    for _, checks, error in outcomes:
        results.extend(checks)
        if error:
            errors.append(error)

    if include_global:
        try:
            results.extend(global_checks(atlas, seed=seed, samples=samples, box=box))
        except Exception as e:
            error_msg = f"Critical error in global atlas checks: {e}"
            logger.error(error_msg, exc_info=True)
            errors.append(error_msg)
            results.append(CheckResult(entry_id="atlas", check="error", passed=False, got=str(e)))

    summary = summarize(results, ids)
    failed = summary.entries_total - summary.entries_verified
    job = finish_job_record(job, entries_processed=len(ids), entries_failed=failed, errors=errors)
    return summary, job
