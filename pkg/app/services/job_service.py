"""
Job record service for atlas verification runs.

Creates and finishes in-memory job records that the CLI and the verification
script log alongside their results.
"""

import logging
import secrets
from datetime import datetime
from typing import List

from src.schemas.models import JobStatus, VerificationJobModel

# Configure logger
logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


def generate_job_id() -> str:
    """
    Generate a unique job ID.

    Format: JOB-{timestamp}-{random_hex}

    Returns:
        str: Unique job identifier
    """
    timestamp = datetime.utcnow().strftime("%Y%m%d-%H%M%S")
    random_hex = secrets.token_hex(4)
    return f"JOB-{timestamp}-{random_hex}"


def create_job_record(job_type: str, workers: int = 1) -> VerificationJobModel:
    """
    Create a job record with status="running" and started_at=now.

    Args:
        job_type: Type of job (e.g., "atlas_verification")
        workers: Number of worker processes

    Returns:
        VerificationJobModel: Created job record
    """
    job = VerificationJobModel(
        job_id=generate_job_id(),
        job_type=job_type,
        status=JobStatus.RUNNING,
        started_at=datetime.utcnow(),
        workers=workers,
    )
    logger.info(f"Created job record: {job.job_id} (type: {job_type}, workers: {workers})")
    return job


def finish_job_record(
    job: VerificationJobModel,
    entries_processed: int,
    entries_failed: int,
    errors: List[str],
) -> VerificationJobModel:
    """
    Complete a job record.

    Sets completed_at, execution_time_ms and the status: "failed" when errors
    were raised during the run, "completed" otherwise. Failing checks are not
    errors; they are counted in entries_failed.

    Args:
        job: Record returned by create_job_record
        entries_processed: Entries whose checks ran
        entries_failed: Entries with at least one failing check
        errors: Error messages of crashed work items

    Returns:
        VerificationJobModel: Updated copy of the record
    """
    completed_at = datetime.utcnow()
    execution_time_ms = (completed_at - job.started_at).total_seconds() * 1000
    status = JobStatus.FAILED if errors else JobStatus.COMPLETED
    finished = job.model_copy(
        update={
            "status": status,
            "completed_at": completed_at,
            "execution_time_ms": execution_time_ms,
            "entries_processed": entries_processed,
            "entries_failed": entries_failed,
            "errors": list(errors),
        }
    )
    logger.info(
        f"Job {job.job_id} finished with status {status.value}: "
        f"{entries_processed} processed, {entries_failed} failed, {execution_time_ms:.0f} ms"
    )
    return finished
