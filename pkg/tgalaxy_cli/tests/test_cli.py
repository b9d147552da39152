import io
import json

import pytest

from tgalaxy.cli.app import EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_OK, main
from tgalaxy.core.audit import CheckAudit
from tgalaxy.core.config import settings
from tgalaxy.ordinal import parse_ordinal


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    assert code == EXIT_OK, err
    return json.loads(out)


@pytest.fixture
def restore_settings(monkeypatch):
    monkeypatch.setattr(settings, "RAY_UNIT", settings.RAY_UNIT)
    monkeypatch.setattr(settings, "SEED", settings.SEED)


def test_distance_table(capsys, suite_path):
    code, out, _ = run(capsys, "distance", "--from", "x1", "--to", "x3", suite_path("omega_ladder"))
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "w*2"
    assert lines[1] == "from ladder[1].x"
    assert "ladder[3].x" in lines[-1]


def test_distance_always_reports_geodesic(capsys, suite_path):
    doc = run_json(capsys, "distance", "--from", "a", "--to", "e", suite_path("path5"))
    assert doc["distance"] == "4"
    assert doc["walk"]["length"] == "4"
    assert doc["walk"]["nodes"][0] == "a" and doc["walk"]["nodes"][-1] == "e"
    assert "oracle" not in doc


def test_distance_oracle_agrees(capsys, suite_path):
    doc = run_json(capsys, "distance", "--from", "x1", "--to", "x3", "--oracle", suite_path("omega_ladder"))
    assert doc["distance"] == "w*2"
    assert doc["oracle"] == "w*2"
    assert doc["oracle_agrees"] is True


def test_distance_oracle_mismatch_exits_2(capsys, monkeypatch, suite_path):
    monkeypatch.setattr("tgalaxy.cli.app.settled_oracle", lambda *a, **k: parse_ordinal("w*3"))
    code, out, _ = run(capsys, "distance", "--from", "x1", "--to", "x3", "--oracle", "--format", "json",
                       suite_path("omega_ladder"))
    assert code == EXIT_CHECK_FAILED
    doc = json.loads(out)
    assert doc["oracle"] == "w*3" and doc["oracle_agrees"] is False


def test_distance_oracle_out_of_reach_exits_3(capsys, suite_path):
    code, _, err = run(capsys, "distance", "--from", "a", "--to", "e", "--oracle", "--max-tips", "0",
                       "--max-steps", "0", suite_path("path5"))
    assert code == EXIT_INVALID
    assert "BoundTooSmall" in err


def test_validate(capsys, suite_path, tmp_path):
    code, out, _ = run(capsys, "validate", suite_path("lad2"))
    assert code == EXIT_OK
    assert "valid presentation of rank 1" in out

    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"rank": 0, "core": {"nodes": ["a", "b"]}}))
    code, out, _ = run(capsys, "validate", str(broken))
    assert code == EXIT_INVALID
    assert "NotWconnected" in out


def test_invalid_inputs_exit_3(capsys, suite_path, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "sections", "--rank", "1", str(bad))
    assert code == EXIT_INVALID
    assert "invalid presentation" in err

    listing = tmp_path / "list.json"
    listing.write_text("[]")
    assert run(capsys, "validate", str(listing))[0] == EXIT_INVALID

    assert run(capsys, "validate", str(tmp_path / "missing.json"))[0] == EXIT_INVALID
    assert run(capsys, "classify", suite_path("omega_ladder"))[0] == EXIT_INVALID
    assert run(capsys, "classify", "--rank", "seven", suite_path("omega_ladder"))[0] == EXIT_INVALID
    assert run(capsys, "classify", "--rank", "warrow", suite_path("omega_ladder"))[0] == EXIT_INVALID
    assert run(capsys, "distance", "--from", "x1", "--to", "nowhere", suite_path("omega_ladder"))[0] == EXIT_INVALID


def test_invalid_presentation_is_rejected_before_commands(capsys, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"rank": 0, "core": {"nodes": ["a", "b"]}}))
    code, _, err = run(capsys, "distance", "--from", "a", "--to", "b", str(broken))
    assert code == EXIT_INVALID
    assert "NotWconnected" in err


def test_stdin_input(capsys, monkeypatch, suite_path):
    with open(suite_path("path5"), encoding="utf-8") as f:
        monkeypatch.setattr("sys.stdin", io.StringIO(f.read()))
    code, out, _ = run(capsys, "distance", "--from", "b", "--to", "d", "-")
    assert code == EXIT_OK
    assert out.splitlines()[:2] == ["2", "from b"]


def test_classify_json(capsys, suite_path):
    doc = run_json(capsys, "classify", "--rank", "1", suite_path("omega_ladder"))
    assert [c["members"] for c in doc["classes"]] == [["std1", "std9"], ["x2n"], ["xn"]]
    assert doc["classes"][0]["principal"] is True
    assert doc["reference"] == "std1"


def test_classify_extra_hypernode(capsys, suite_path):
    doc = run_json(capsys, "classify", "--rank", "1", "--hypernode", "x3n=arm(ladder, 3, 0, x)",
                   suite_path("omega_ladder"))
    assert ["x3n"] in [c["members"] for c in doc["classes"]]
    assert run(capsys, "classify", "--rank", "1", "--hypernode", "broken", suite_path("omega_ladder"))[0] == EXIT_INVALID


@pytest.mark.parametrize("argv", [
    ("classify", "--rank", "1", "two_arms"),
    ("order", "--rank", "1", "two_arms"),
    ("witness-chain", "--rank", "1", "--around", "xn", "--depth", "2", "omega_ladder"),
])
def test_reports_are_identical_across_jobs(capsys, suite_path, argv):
    *flags, suite = argv
    runs = [run(capsys, *flags, "--jobs", jobs, "--format", "json", suite_path(suite))[:2] for jobs in ("1", "4")]
    assert runs[0] == runs[1]
    assert json.loads(runs[0][1])


def test_interleave_ambiguity_in_table(capsys, suite_path):
    code, out, _ = run(capsys, "classify", "--rank", "1", "--hypernode",
                       "mix=interleave(2, std(x1), arm(ladder, 1, 0, x))", suite_path("omega_ladder"))
    assert code == EXIT_OK
    assert "ultrafilter-dependent pairs" in out


def test_output_file_matches_stdout(capsys, suite_path, tmp_path):
    target = tmp_path / "out" / "sections.json"
    code, out, _ = run(capsys, "sections", "--rank", "1", "--format", "json", "--output", str(target),
                       suite_path("omega_ladder"))
    assert code == EXIT_OK
    assert json.loads(target.read_text()) == json.loads(out)


def test_sections_and_boundary(capsys, suite_path):
    doc = run_json(capsys, "sections", "--rank", "1", suite_path("omega_ladder"))
    [section] = doc["sections"]
    assert section["locally_finite"] is True
    boundary = run_json(capsys, "boundary", "--rank", "1", "--section", section["id"], "--copy", "2",
                        suite_path("omega_ladder"))
    assert boundary["copy_index"] == 2
    assert boundary["sections"] == [{"section": section["id"], "boundary_wnodes": ["ladder[2].x"], "infinite": True}]


def test_boundary_lists_every_section(capsys, suite_path):
    for suite in ("omega_ladder", "lad2", "star_of_rays"):
        ids = sorted(s["id"] for s in run_json(capsys, "sections", "--rank", "1", suite_path(suite))["sections"])
        doc = run_json(capsys, "boundary", "--rank", "1", suite_path(suite))
        assert [s["section"] for s in doc["sections"]] == ids
        assert "copy_index" not in doc
    code, out, _ = run(capsys, "boundary", "--rank", "1", suite_path("omega_ladder"))
    assert code == EXIT_OK
    assert out.startswith("boundary 1-wnodes of ")


def test_locally_finite_table(capsys, suite_path):
    doc = run_json(capsys, "locally-finite", "--rank", "1", suite_path("star_of_rays"))
    assert list(doc["sections"].values()) == [False]


def test_escape_walk(capsys, suite_path):
    doc = run_json(capsys, "escape-walk", "--rank", "1", "--from", "x0", "--count", "3", suite_path("omega_ladder"))
    assert [p["wnode"] for p in doc["picks"]] == ["ladder[1].x", "ladder[2].x", "ladder[3].x"]
    assert [p["bound"] for p in doc["picks"]] == ["w", "w*2", "w*3"]
    assert doc["presentation"] == "arm(ladder,1,1,x)"
    assert doc["outside_principal"] is True


def test_order_table(capsys, suite_path):
    code, out, _ = run(capsys, "order", "--rank", "1", suite_path("two_arms"))
    assert code == EXIT_OK
    assert "partial order" in out
    assert "a2n ~ b2n" in out and "an ~ bn" in out


def test_witness_chain_json(capsys, suite_path):
    doc = run_json(capsys, "witness-chain", "--rank", "1", "--around", "xn", "--depth", "2",
                   suite_path("omega_ladder"))
    assert len(doc["chain"]) == 5
    assert len(doc["pairwise"]) == 10
    assert doc["ok"] is True


def test_check_writes_audit(capsys, suite_path):
    code, out, _ = run(capsys, "check", "--rank", "1", "--theorem", "escape", "--count", "3",
                       "--format", "json", suite_path("omega_ladder"))
    assert code == EXIT_OK
    doc = json.loads(out)
    [entry] = CheckAudit().history()
    assert entry["check"] == "escape"
    assert entry["outcome"] == "pass"
    assert entry["digest"] == doc["digest"]


def test_check_all_records_skips(capsys, suite_path):
    code, out, _ = run(capsys, "check", "--rank", "0", "--depth", "1", "--count", "2",
                       "--format", "json", suite_path("path5"))
    assert code == EXIT_OK
    doc = json.loads(out)
    by_name = {c["check"]: c for c in doc["checks"]}
    assert set(by_name) == {"containment", "escape", "chain", "order", "adjacency", "hyperbranch",
                            "refinement", "propagation"}
    assert "skipped" in by_name["adjacency"]["details"]
    assert len(CheckAudit().history()) == 8


def test_check_accepts_numeric_theorem_ids(capsys, suite_path):
    code, out, _ = run(capsys, "check", "--theorem", "5.1", "--rank", "1", "--around", "xn", "--depth", "2",
                       "--format", "json", suite_path("omega_ladder"))
    assert code == EXIT_OK
    [result] = json.loads(out)["checks"]
    assert result["check"] == "chain"
    assert len(result["details"]["chain"]) == 5
    assert [e["check"] for e in CheckAudit().history()] == ["chain"]
    code, out, _ = run(capsys, "check", "--theorem", "4.3", "--rank", "1", "--count", "3", "--format", "json",
                       suite_path("omega_ladder"))
    assert code == EXIT_OK
    assert [c["check"] for c in json.loads(out)["checks"]] == ["escape"]
    assert run(capsys, "check", "--theorem", "9.9", "--rank", "1", suite_path("omega_ladder"))[0] == EXIT_INVALID


def test_explicit_check_with_failed_hypothesis_exits_3(capsys, suite_path):
    code, _, err = run(capsys, "check", "--rank", "1", "--theorem", "chain", "--around", "std1",
                       suite_path("omega_ladder"))
    assert code == EXIT_INVALID
    assert "NotArmIndexed" in err


def test_oracle_check(capsys, suite_path, restore_settings):
    doc = run_json(capsys, "oracle-check", "--depth", "1", "--max-steps", "6", "--seed", "3",
                   "--ray-unit", "2", suite_path("path5"))
    assert doc["mismatches"] == []
    assert doc["pairs_checked"] == 10
    history = CheckAudit().history(check="oracle")
    assert history and history[0]["command"] == "oracle-check"


def test_schema(capsys):
    code, out, _ = run(capsys, "schema")
    assert code == EXIT_OK
    names = out.split()
    assert "presentation" in names and "report.classify" in names
    code, out, _ = run(capsys, "schema", "presentation")
    assert "properties" in json.loads(out)
    assert run(capsys, "schema", "report.nothing")[0] == EXIT_INVALID


def test_unroll(capsys, suite_path):
    doc = run_json(capsys, "unroll", "--depth", "1", suite_path("path5"))
    assert [n["id"] for n in doc["nodes"]] == ["a", "b", "c", "d", "e"]
    assert len(doc["branches"]) == 4
    assert run(capsys, "unroll", "--depth", "0", suite_path("path5"))[0] == EXIT_INVALID
