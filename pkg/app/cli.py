"""
Command-line front end of the fine-interior toolkit.

Reports go to stdout (byte-stable for fixed inputs and seed); logs go to
stderr. Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import BaseModel

from app.config import get_settings
from app.jobs.verify_job import run_verification
from app.services.atlas_service import (
    Atlas,
    atlas_markdown,
    classify_polytope,
    lattice_coarsen,
    lattice_refine_cover,
    load_atlas,
    split_entry,
)
from app.services.fans import crepant_refinement_of, delta_tilde_fan, fan_to_dot, fan_to_json, normal_fan
from app.services.polytope import Polytope, normal_form
from app.services.report_service import (
    analysis_markdown,
    analysis_report,
    atlas_entry_model,
    coarsening_model,
    cover_model,
    fine_interior_report,
    split_model,
    verification_lines,
)
from app.utils.rational_codec import dumps, polytope_from_json
from src.schemas.models import OutputFormat

# Configure logger
logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class UsageError(Exception):
    """Bad arguments or unreadable input; maps to exit code 2."""


# ============================================================================
# HELPERS
# ============================================================================


def configure_logging(verbose: bool) -> None:
    """Log to stderr; -v lowers every toolkit logger to DEBUG."""
    level = logging.DEBUG if verbose else getattr(logging, get_settings().log_level, logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)
    for name in list(logging.root.manager.loggerDict):
        if name.startswith("app") or name.startswith("src"):
            logging.getLogger(name).setLevel(level)


def read_polytope(source: Optional[str]) -> Polytope:
    """
    Read ``{"vertices": [...]}`` from a file, or from stdin for "-".

    Raises:
        UsageError: If the input is missing, unreadable or malformed
    """
    if source is None:
        raise UsageError("--input is required")
    try:
        text = sys.stdin.read() if source == "-" else Path(source).read_text(encoding="utf-8")
        return polytope_from_json(json.loads(text))
    except OSError as e:
        raise UsageError(f"Cannot read {source}: {e}") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"Invalid JSON in {source}: {e}") from e
    except ValueError as e:
        raise UsageError(f"Invalid polytope in {source}: {e}") from e


def emit_model(model: BaseModel, fmt: OutputFormat, title: str = "") -> None:
    payload = model.model_dump(mode="json", by_alias=True)
    if fmt is OutputFormat.JSON:
        sys.stdout.write(dumps(payload))
        return
    lines = [f"# {title}", ""] if title else []
    lines += [f"- {key}: {json.dumps(value, ensure_ascii=False)}" for key, value in payload.items()]
    sys.stdout.write("\n".join(lines) + "\n")


def _load(args: argparse.Namespace) -> Atlas:
    try:
        return load_atlas(args.atlas)
    except (FileNotFoundError, RuntimeError) as e:
        raise UsageError(str(e)) from e


def _entry(atlas: Atlas, entry_id: str):
    try:
        return atlas.get(entry_id)
    except KeyError as e:
        raise UsageError(f"Unknown atlas id: {entry_id}") from e


# ============================================================================
# COMMANDS
# ============================================================================


def cmd_analyze(args: argparse.Namespace) -> int:
    delta = read_polytope(args.input)
    try:
        report = analysis_report(delta, _load(args))
    except ValueError as e:
        raise UsageError(str(e)) from e
    if args.format is OutputFormat.MARKDOWN:
        sys.stdout.write(analysis_markdown(report))
    else:
        sys.stdout.write(dumps(report.model_dump(mode="json")))
    return EXIT_OK


def cmd_fine_interior(args: argparse.Namespace) -> int:
    delta = read_polytope(args.input)
    try:
        report = fine_interior_report(delta)
    except ValueError as e:
        raise UsageError(str(e)) from e
    emit_model(report, args.format, "Fine interior")
    return EXIT_OK


def cmd_fan(args: argparse.Namespace) -> int:
    delta = read_polytope(args.input)
    builders = {"normal": normal_fan, "delta-tilde": delta_tilde_fan, "refinement": crepant_refinement_of}
    try:
        fan = builders[args.kind](delta)
    except ValueError as e:
        raise UsageError(str(e)) from e
    if args.dot:
        sys.stdout.write(fan_to_dot(fan, name=args.kind.replace("-", "_")))
    else:
        sys.stdout.write(dumps(fan_to_json(fan)))
    return EXIT_OK


def cmd_atlas_list(args: argparse.Namespace) -> int:
    atlas = _load(args)
    if args.format is OutputFormat.MARKDOWN:
        sys.stdout.write(atlas_markdown(atlas, args.fine_class))
        return EXIT_OK
    entries = [e for e in atlas.entries if args.fine_class is None or e.fine_class == args.fine_class]
    sys.stdout.write(dumps([atlas_entry_model(e).model_dump(mode="json", by_alias=True) for e in entries]))
    return EXIT_OK


def cmd_atlas_show(args: argparse.Namespace) -> int:
    atlas = _load(args)
    entry = _entry(atlas, args.id)
    model = atlas_entry_model(entry)
    report = analysis_report(entry.polytope, atlas)
    if args.format is OutputFormat.MARKDOWN:
        sys.stdout.write(f"# {entry.id} (class {entry.fine_class})\n\n")
        sys.stdout.write(f"- spanning set: {entry.spanning_label()}\n")
        sys.stdout.write(f"- closure: {entry.closure or 'canonically closed'}\n\n")
        sys.stdout.write(analysis_markdown(report))
        return EXIT_OK
    payload = {
        "entry": model.model_dump(mode="json", by_alias=True),
        "normal_form": [list(v) for v in normal_form(entry.polytope)],
        "report": report.model_dump(mode="json"),
    }
    sys.stdout.write(dumps(payload))
    return EXIT_OK


def cmd_atlas_classify(args: argparse.Namespace) -> int:
    atlas = _load(args)
    if args.input is not None:
        delta = read_polytope(args.input)
        try:
            result = {"class": classify_polytope(delta, atlas)}
        except ValueError as e:
            logger.error(f"Classification failed: {e}")
            sys.stdout.write(dumps({"class": None, "error": str(e)}))
            return EXIT_FAILURE
    elif args.id is not None:
        result = {args.id: classify_polytope(_entry(atlas, args.id).polytope, atlas)}
    else:
        result = {e.id: classify_polytope(e.polytope, atlas) for e in atlas.entries}
    sys.stdout.write(dumps(result))
    return EXIT_OK


def cmd_atlas_verify(args: argparse.Namespace) -> int:
    settings = get_settings()
    atlas = _load(args)
    for entry_id in args.entry or []:
        _entry(atlas, entry_id)
    summary, job = run_verification(
        atlas_path=args.atlas,
        jobs=args.jobs if args.jobs is not None else settings.jobs,
        seed=args.seed if args.seed is not None else settings.seed,
        samples=args.samples,
        entry_ids=args.entry,
        include_global=not args.no_global,
    )
    logger.info(f"Job record: {job.model_dump_json()}")
    if args.format is OutputFormat.JSON:
        sys.stdout.write(dumps(summary.model_dump(mode="json")))
    else:
        sys.stdout.write(verification_lines(summary))
    return EXIT_OK if summary.passed else EXIT_FAILURE


def cmd_split(args: argparse.Namespace) -> int:
    atlas = _load(args)
    entry = _entry(atlas, args.id)
    try:
        model = split_model(entry, split_entry(entry, atlas))
    except ValueError as e:
        raise UsageError(str(e)) from e
    emit_model(model, args.format, f"Split of {entry.id}")
    return EXIT_OK


def cmd_cover(args: argparse.Namespace) -> int:
    atlas = _load(args)
    entry = _entry(atlas, args.id)
    try:
        model = cover_model(entry, lattice_refine_cover(entry, atlas))
    except ValueError as e:
        raise UsageError(str(e)) from e
    emit_model(model, args.format, f"Double cover of {entry.id}")
    return EXIT_OK


def cmd_coarsen(args: argparse.Namespace) -> int:
    entry_id = None
    if args.id is not None:
        atlas = _load(args)
        delta = _entry(atlas, args.id).polytope
        entry_id = args.id
    else:
        delta = read_polytope(args.input)
    try:
        result = lattice_coarsen(delta, axis=args.axis, factor=args.factor)
    except ValueError as e:
        raise UsageError(str(e)) from e
    emit_model(coarsening_model(result, args.axis, args.factor, entry_id), args.format, "Coarsening")
    return EXIT_OK


# ============================================================================
# PARSER
# ============================================================================


def common_options() -> argparse.ArgumentParser:
    """Options shared by every subcommand, built fresh for each subparser."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")
    common.add_argument(
        "--format",
        type=OutputFormat,
        choices=list(OutputFormat),
        default=OutputFormat.JSON,
        help="Output format (default: json)",
    )
    common.add_argument("--atlas", default=None, help="Atlas JSON file (default: embedded atlas)")
    return common


def build_parser() -> argparse.ArgumentParser:

    parser = argparse.ArgumentParser(
        prog="fine-interior-toolkit",
        description="Fine interiors, canonical closures and hypersurface invariants of lattice 3-topes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Full report of a polytope
  fine-interior-toolkit analyze --input polytope.json

  # Verify the atlas with four worker processes
  fine-interior-toolkit atlas verify --jobs 4

  # Atlas table as markdown
  fine-interior-toolkit atlas list --format markdown
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common_options()], help="End-to-end report of a polytope")
    p.add_argument("--input", help="Polytope JSON file, '-' for stdin")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("fine-interior", parents=[common_options()], help="Fine interior, support and closure")
    p.add_argument("--input", help="Polytope JSON file, '-' for stdin")
    p.set_defaults(handler=cmd_fine_interior)

    p = sub.add_parser("fan", parents=[common_options()], help="Export a fan of a polytope")
    p.add_argument("--input", help="Polytope JSON file, '-' for stdin")
    p.add_argument("--kind", choices=["normal", "delta-tilde", "refinement"], default="normal")
    p.add_argument("--dot", action="store_true", help="DOT graph instead of JSON")
    p.set_defaults(handler=cmd_fan)

    atlas = sub.add_parser("atlas", help="The 49-polytope atlas")
    atlas_sub = atlas.add_subparsers(dest="atlas_command", required=True)

    p = atlas_sub.add_parser("list", parents=[common_options()], help="List atlas entries")
    p.add_argument("--class", dest="fine_class", choices=["a", "b", "c", "d", "e"], default=None)
    p.set_defaults(handler=cmd_atlas_list)

    p = atlas_sub.add_parser("show", parents=[common_options()], help="Entry with its computed report")
    p.add_argument("id", help="Atlas id")
    p.set_defaults(handler=cmd_atlas_show)

    p = atlas_sub.add_parser("classify", parents=[common_options()], help="Fine-interior type of entries or an input")
    p.add_argument("id", nargs="?", default=None, help="Atlas id (default: all entries)")
    p.add_argument("--input", help="Classify a polytope JSON file instead")
    p.set_defaults(handler=cmd_atlas_classify)

    p = atlas_sub.add_parser("verify", parents=[common_options()], help="Recompute and check every table row")
    p.add_argument("--jobs", type=int, default=None, help="Worker processes (default: FIT_JOBS)")
    p.add_argument("--seed", type=int, default=None, help="Seed of the random samples (default: FIT_SEED)")
    p.add_argument("--samples", type=int, default=None, help="Random canonical Fano samples")
    p.add_argument("--entry", action="append", default=None, help="Only verify this id (repeatable)")
    p.add_argument("--no-global", action="store_true", help="Skip the whole-atlas checks")
    p.add_argument("--json", dest="format", action="store_const", const=OutputFormat.JSON)
    p.add_argument("--md", dest="format", action="store_const", const=OutputFormat.MARKDOWN)
    p.set_defaults(handler=cmd_atlas_verify, format=OutputFormat.MARKDOWN)

    p = sub.add_parser("split", parents=[common_options()], help="Split a maximal polytope at its symmetry plane")
    p.add_argument("id", help="Atlas id of a class maximal polytope")
    p.set_defaults(handler=cmd_split)

    p = sub.add_parser("cover", parents=[common_options()], help="Lattice-refinement double cover (classes c, d, e)")
    p.add_argument("id", help="Atlas id")
    p.set_defaults(handler=cmd_cover)

    p = sub.add_parser("coarsen", parents=[common_options()], help="Index-k lattice coarsening")
    p.add_argument("id", nargs="?", default=None, help="Atlas id (or use --input)")
    p.add_argument("--input", help="Polytope JSON file, '-' for stdin")
    p.add_argument("--axis", type=int, choices=[0, 1, 2], default=0)
    p.add_argument("--factor", type=int, default=2)
    p.set_defaults(handler=cmd_coarsen)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except UsageError as e:
        logger.error(str(e))
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
