#!/usr/bin/env python3
"""
Atlas verification script.

Recomputes every row of the 49-polytope atlas and prints a coloured summary
grouped by entry.

Usage:
    python scripts/verify_atlas.py

    # Four worker processes, 100 random closure-law samples
    python scripts/verify_atlas.py --jobs 4 --samples 100
"""

import argparse
import logging
import sys
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from colorama import Fore, Style, init  # noqa: E402

from app.jobs.verify_job import run_verification  # noqa: E402
from src.schemas.models import CheckResult  # noqa: E402

init(autoreset=True)


# ============================================================================
# HELPER FUNCTIONS
# ============================================================================


def print_success(message: str) -> None:
    """Print success message."""
    print(f"{Fore.GREEN}✅ {message}{Fore.RESET}")


def print_error(message: str) -> None:
    """Print error message."""
    print(f"{Fore.RED}❌ {message}{Fore.RESET}")


def print_info(message: str) -> None:
    """Print info message."""
    print(f"{Fore.CYAN}ℹ️  {message}{Fore.RESET}")


def print_header(message: str) -> None:
    """Print section header."""
    print(f"\n{Style.BRIGHT}{Fore.BLUE}{'=' * 70}")
    print(f"{Style.BRIGHT}{Fore.BLUE}{message}")
    print(f"{Style.BRIGHT}{Fore.BLUE}{'=' * 70}{Style.RESET_ALL}")


def group_by_entry(results: List[CheckResult]) -> Dict[str, List[CheckResult]]:
    grouped: Dict[str, List[CheckResult]] = OrderedDict()
    for r in results:
        grouped.setdefault(r.entry_id, []).append(r)
    return grouped


# ============================================================================
# MAIN EXECUTION
# ============================================================================


def main() -> int:
    """Main execution function."""
    parser = argparse.ArgumentParser(description="Verify the 49-polytope atlas")
    parser.add_argument("--jobs", type=int, default=1, help="Worker processes (default: 1)")
    parser.add_argument("--seed", type=int, default=0, help="Seed of the random samples (default: 0)")
    parser.add_argument("--samples", type=int, default=None, help="Random canonical Fano samples")
    args = parser.parse_args()

    logging.basicConfig(level=logging.WARNING, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    print_header("Atlas Verification")
    print_info(f"Workers: {args.jobs}, seed: {args.seed}")

    summary, job = run_verification(jobs=args.jobs, seed=args.seed, samples=args.samples)

    for entry_id, checks in group_by_entry(summary.results).items():
        failed = [r for r in checks if not r.passed]
        if failed:
            print_error(f"{entry_id}: {len(failed)} of {len(checks)} checks failed")
            for r in failed:
                print(f"    {r.check}: expected {r.expected}, got {r.got}")
        else:
            print_success(f"{entry_id}: {len(checks)} checks passed")

    print_header("Summary")
    print_info(f"Job {job.job_id} ({job.status.value}) in {job.execution_time_ms:.0f} ms")
    message = f"{summary.entries_verified}/{summary.entries_total} entries verified"
    if summary.passed:
        print_success(message)
        return 0
    print_error(f"{message}, {summary.checks_failed} checks failed")
    return 1


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print_error("\nInterrupted by user")
        sys.exit(1)
