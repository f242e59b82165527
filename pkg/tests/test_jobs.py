"""
Tests for verification job records, the report summary and the
verification job runner.
"""

import re

import pytest

from app.jobs.verify_job import run_verification
from app.services.job_service import create_job_record, finish_job_record, generate_job_id
from app.services.report_service import summarize, verification_lines
from src.schemas.models import CheckResult, JobStatus


# ============================================================================
# JOB RECORDS
# ============================================================================


@pytest.mark.atlas
def test_job_id_format() -> None:
    assert re.fullmatch(r"JOB-\d{8}-\d{6}-[0-9a-f]{8}", generate_job_id())
    assert generate_job_id() != generate_job_id()


@pytest.mark.atlas
def test_job_record_lifecycle() -> None:
    """
    Verifies:
    - a new record is running with no completion time
    - finishing without errors completes it
    - finishing with errors marks it failed
    """
    job = create_job_record("atlas_verification", workers=2)
    assert job.status == JobStatus.RUNNING
    assert job.completed_at is None
    assert job.workers == 2

    done = finish_job_record(job, entries_processed=3, entries_failed=1, errors=[])
    assert done.status == JobStatus.COMPLETED
    assert done.entries_failed == 1
    assert done.execution_time_ms is not None and done.execution_time_ms >= 0
    assert job.status == JobStatus.RUNNING

    crashed = finish_job_record(job, entries_processed=3, entries_failed=1, errors=["boom"])
    assert crashed.status == JobStatus.FAILED
    assert crashed.errors == ["boom"]


# ============================================================================
# SUMMARIES
# ============================================================================


@pytest.mark.atlas
def test_summarize_and_lines() -> None:
    results = [
        CheckResult(entry_id="x", check="one", passed=True, expected="1", got="1"),
        CheckResult(entry_id="y", check="two", passed=False, expected="2", got="3"),
        CheckResult(entry_id="atlas", check="global", passed=True, expected="True", got="True"),
    ]
    summary = summarize(results, ["x", "y"])
    assert (summary.entries_total, summary.entries_verified) == (2, 1)
    assert (summary.checks_passed, summary.checks_failed) == (2, 1)
    assert not summary.passed

    lines = verification_lines(summary).splitlines()
    assert lines[0] == "PASS x one"
    assert lines[1] == "FAIL y two: expected 2, got 3"
    assert lines[-1] == "1/2 entries verified (2 checks passed, 1 failed)"


# ============================================================================
# RUNNER
# ============================================================================


@pytest.mark.atlas
@pytest.mark.integration
def test_run_verification_on_one_entry() -> None:
    summary, job = run_verification(entry_ids=["d"], include_global=False)
    assert summary.passed, [r for r in summary.results if not r.passed]
    assert job.status == JobStatus.COMPLETED
    assert job.entries_processed == 1


@pytest.mark.atlas
def test_run_verification_rejects_unknown_id() -> None:
    with pytest.raises(KeyError):
        run_verification(entry_ids=["000000"], include_global=False)


@pytest.mark.atlas
@pytest.mark.slow
def test_parallel_run_matches_inline_run() -> None:
    ids = ["c", "d", "e"]
    inline, _ = run_verification(entry_ids=ids, include_global=False, jobs=1)
    parallel, job = run_verification(entry_ids=ids, include_global=False, jobs=2)
    assert parallel.model_dump() == inline.model_dump()
    assert job.workers == 2
