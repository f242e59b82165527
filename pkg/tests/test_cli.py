"""
Tests for the command-line front end, driven through main(argv).

Verifies exit codes (0 success, 1 verification failure, 2 usage error),
JSON and markdown output on stdout, and stdin input.
"""

import io
import json

import pytest

from app.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, build_parser, main
from app.config import DEFAULT_ATLAS_PATH
from src.schemas.models import OutputFormat
from tests.conftest import CUBE_VERTICES, OCTAHEDRON_VERTICES


@pytest.fixture
def octahedron_file(tmp_path):
    path = tmp_path / "octahedron.json"
    path.write_text(json.dumps({"vertices": [list(v) for v in OCTAHEDRON_VERTICES]}), encoding="utf-8")
    return str(path)


@pytest.fixture
def cube_file(tmp_path):
    path = tmp_path / "cube.json"
    path.write_text(json.dumps({"vertices": [list(v) for v in CUBE_VERTICES]}), encoding="utf-8")
    return str(path)


def run(capsys, *argv):
    """Run the CLI and return (exit code, stdout)."""
    code = main(list(argv))
    return code, capsys.readouterr().out


# ============================================================================
# POLYTOPE COMMANDS
# ============================================================================


@pytest.mark.cli
def test_analyze_octahedron(capsys, octahedron_file) -> None:
    code, out = run(capsys, "analyze", "--input", octahedron_file)
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["lattice_points"] == 7
    assert report["reflexive"] is True
    assert report["fine_interior_class"] is None
    assert report["singularities"] is None
    assert report["invariants"]["p_g"] == 1


@pytest.mark.cli
def test_analyze_reads_stdin(capsys, monkeypatch) -> None:
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps({"vertices": [list(v) for v in CUBE_VERTICES]})))
    code, out = run(capsys, "analyze", "--input", "-", "--format", "markdown")
    assert code == EXIT_OK
    assert out.startswith("# Polytope analysis")
    assert "lattice points: 27, interior: 1" in out


@pytest.mark.cli
def test_analyze_is_byte_stable(capsys, octahedron_file) -> None:
    _, first = run(capsys, "analyze", "--input", octahedron_file)
    _, second = run(capsys, "analyze", "--input", octahedron_file)
    assert first == second


@pytest.mark.cli
def test_format_defaults_are_per_command(capsys, octahedron_file) -> None:
    """
    Verifies:
    - report commands default to JSON even though verify defaults to lines
    - verify accepts --format json as well as --json
    """
    parser = build_parser()
    assert parser.parse_args(["analyze"]).format is OutputFormat.JSON
    assert parser.parse_args(["atlas", "list"]).format is OutputFormat.JSON
    assert parser.parse_args(["atlas", "verify"]).format is OutputFormat.MARKDOWN
    assert parser.parse_args(["atlas", "verify", "--json"]).format is OutputFormat.JSON
    assert parser.parse_args(["atlas", "verify", "--format", "json"]).format is OutputFormat.JSON
    # parsing verify leaves the other commands untouched
    assert parser.parse_args(["analyze"]).format is OutputFormat.JSON

    code, out = run(capsys, "analyze", "--input", octahedron_file)
    assert code == EXIT_OK
    assert out.startswith("{")


@pytest.mark.cli
def test_malformed_input_is_a_usage_error(capsys, tmp_path) -> None:
    bad = tmp_path / "bad.json"
    bad.write_text("{vertices: oops", encoding="utf-8")
    assert main(["analyze", "--input", str(bad)]) == EXIT_USAGE
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"vertices": []}), encoding="utf-8")
    assert main(["fine-interior", "--input", str(empty)]) == EXIT_USAGE
    assert main(["analyze"]) == EXIT_USAGE
    assert main(["analyze", "--input", str(tmp_path / "missing.json")]) == EXIT_USAGE


@pytest.mark.cli
def test_flat_input_is_a_usage_error(capsys, tmp_path) -> None:
    flat = tmp_path / "flat.json"
    flat.write_text(json.dumps({"vertices": [[0, 0, 0], [1, 0, 0], [0, 1, 0]]}), encoding="utf-8")
    assert main(["analyze", "--input", str(flat)]) == EXIT_USAGE


@pytest.mark.cli
def test_fine_interior_markdown(capsys, octahedron_file) -> None:
    code, out = run(capsys, "fine-interior", "--input", octahedron_file, "--format", "markdown")
    assert code == EXIT_OK
    assert out.startswith("# Fine interior")
    assert "- canonically_closed: true" in out


@pytest.mark.cli
def test_fan_exports(capsys, cube_file) -> None:
    code, out = run(capsys, "fan", "--input", cube_file)
    assert code == EXIT_OK
    assert len(json.loads(out)["rays"]) == 6
    code, out = run(capsys, "fan", "--input", cube_file, "--dot")
    assert code == EXIT_OK
    assert out.startswith("graph normal {")


# ============================================================================
# ATLAS COMMANDS
# ============================================================================


@pytest.mark.cli
@pytest.mark.atlas
def test_atlas_list(capsys) -> None:
    code, out = run(capsys, "atlas", "list", "--class", "c")
    assert code == EXIT_OK
    entries = json.loads(out)
    assert [e["id"] for e in entries] == ["c"]
    assert entries[0]["class"] == "c"

    code, out = run(capsys, "atlas", "list", "--format", "markdown")
    assert code == EXIT_OK
    assert len(out.strip().splitlines()) == 2 + 49


@pytest.mark.cli
@pytest.mark.atlas
def test_atlas_show_unknown_id(capsys) -> None:
    assert main(["atlas", "show", "000000"]) == EXIT_USAGE


@pytest.mark.cli
@pytest.mark.atlas
def test_atlas_classify(capsys, octahedron_file) -> None:
    code, out = run(capsys, "atlas", "classify", "547444")
    assert code == EXIT_OK
    assert json.loads(out) == {"547444": "a"}

    code, out = run(capsys, "atlas", "classify", "--input", octahedron_file)
    assert code == EXIT_FAILURE
    assert json.loads(out)["class"] is None


@pytest.mark.cli
@pytest.mark.atlas
def test_split_and_cover(capsys) -> None:
    code, out = run(capsys, "split", "547444")
    assert code == EXIT_OK
    split = json.loads(out)
    assert split["shared_reflexive"] is True
    assert [c["singularities"] for c in split["components"]] == [{"A1": 3}, {"A1": 3}]

    assert main(["split", "534866"]) == EXIT_USAGE

    code, out = run(capsys, "cover", "c")
    assert code == EXIT_OK
    cover = json.loads(out)
    assert (cover["p_g"], cover["K2"], cover["quadric_relation"]) == (3, 4, True)

    assert main(["cover", "547444"]) == EXIT_USAGE


@pytest.mark.cli
@pytest.mark.atlas
def test_coarsen(capsys, octahedron_file) -> None:
    code, out = run(capsys, "coarsen", "d")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["kept"] == 11
    assert len(report["dropped"]) == 4
    assert report["reflexive"] is True

    assert main(["coarsen", "--input", octahedron_file, "--factor", "0"]) == EXIT_USAGE


@pytest.mark.cli
def test_unknown_command_and_help(capsys) -> None:
    assert main(["bogus"]) == EXIT_USAGE
    assert main(["--help"]) == EXIT_OK


# ============================================================================
# VERIFICATION
# ============================================================================


@pytest.mark.cli
@pytest.mark.integration
def test_verify_single_entry(capsys) -> None:
    code, out = run(capsys, "atlas", "verify", "--entry", "e", "--no-global", "--json")
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary["entries_total"] == 1
    assert summary["checks_failed"] == 0


@pytest.mark.cli
@pytest.mark.integration
def test_verify_corrupted_atlas_fails(capsys, tmp_path) -> None:
    """
    Verifies:
    - a wrong expected column makes verification exit 1
    - the failing check is printed with expected and computed values
    """
    data = json.loads(DEFAULT_ATLAS_PATH.read_text(encoding="utf-8"))
    for raw in data["entries"]:
        if raw["id"] == "547444":
            raw["picard"] = 8
    corrupted = tmp_path / "atlas.json"
    corrupted.write_text(json.dumps(data), encoding="utf-8")

    code, out = run(capsys, "atlas", "verify", "--atlas", str(corrupted), "--entry", "547444", "--no-global")
    assert code == EXIT_FAILURE
    assert "FAIL 547444 picard: expected 8, got 7" in out
    assert out.strip().splitlines()[-1].startswith("0/1 entries verified")


@pytest.mark.cli
def test_verify_unknown_entry_is_a_usage_error(capsys) -> None:
    assert main(["atlas", "verify", "--entry", "000000", "--no-global"]) == EXIT_USAGE
