"""Command-line interface: exit codes, formats, determinism."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from pddb.cli import main
from pddb.engine import evaluate
from pddb.parser import parse_program

from conftest import EXAMPLES_DIR


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def ex(name: str) -> str:
    return str(EXAMPLES_DIR / name)


class TestCheck:
    def test_clean_program(self, capsys):
        code, out, err = run_cli(capsys, "check", ex("medical.pddb"))
        assert code == 0
        assert err == ""

    def test_mode_disagreement(self, capsys, tmp_path):
        bad = tmp_path / "bad.pddb"
        bad.write_text(
            "p <[1,1],[0,0]> <- q ; disj=pc.\n"
            "p <[1,1],[0,0]> <- r ; disj=ign.\n"
            "q <[1,1],[0,0]>.\nr <[1,1],[0,0]>.\n")
        code, out, err = run_cli(capsys, "check", str(bad))
        assert code == 1
        line = err.strip().splitlines()[0]
        severity, code_word, pos, *_ = line.split()
        assert severity == "error"
        assert code_word == "MODE_AGREEMENT"
        assert pos == "2:1"

    def test_missing_file(self, capsys):
        code, out, err = run_cli(capsys, "check", "no/such/file.pddb")
        assert code == 3

    def test_syntax_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.pddb"
        bad.write_text("p <[1,1],[0,0]\n")
        code, out, err = run_cli(capsys, "check", str(bad))
        assert code == 1
        assert "SYNTAX" in err

    def test_warning_only_is_ok(self, capsys):
        code, out, err = run_cli(capsys, "check", ex("tc2_ign.pddb"))
        assert code == 0
        assert "NONTERMINATING_MODE" in err


class TestEval:
    def test_certain_path_json(self, capsys):
        code, out, _ = run_cli(capsys, "eval", ex("tc1.pddb"), "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["status"] == "exact"
        match = [a for a in payload["atoms"]
                 if a["pred"] == "p" and a["args"] == [1, 2]]
        assert match and match[0]["belief"] == [1.0, 1.0]
        assert match[0]["doubt"] == [0.0, 0.0]

    def test_approximate_exit_zero(self, capsys):
        code, out, _ = run_cli(capsys, "eval", ex("tc2_ign.pddb"),
                               "--max-iters", "200", "--json")
        assert code == 0
        assert json.loads(out)["status"] == "approximate"

    def test_strict_refusal(self, capsys):
        code, out, err = run_cli(capsys, "eval", ex("tc2_ign.pddb"),
                                 "--max-iters", "200", "--strict")
        assert code == 2
        assert "NONTERMINATING_MODE" in err

    def test_two_runs_byte_identical(self, capsys):
        outputs = []
        for _ in range(2):
            code, out, _ = run_cli(capsys, "eval", ex("ex52.pddb"), "--json")
            assert code == 0
            outputs.append(out)
        assert outputs[0] == outputs[1]

    def test_json_round_trips_bit_exactly(self, capsys, ex52):
        _, out, _ = run_cli(capsys, "eval", ex("ex52.pddb"), "--json")
        payload = json.loads(out)
        engine = evaluate(ex52).valuation
        by_pred = {a["pred"]: a for a in payload["atoms"]}
        for atom, conf in engine.items():
            entry = by_pred[atom.pred]
            assert entry["belief"] == [conf.belief_lo, conf.belief_hi]
            assert entry["doubt"] == [conf.doubt_lo, conf.doubt_hi]

    def test_text_output_is_fact_syntax(self, capsys):
        code, out, _ = run_cli(capsys, "eval", ex("tc1.pddb"))
        assert code == 0
        assert "p(1,2) <[1,1],[0,0]>" in out
        assert out.strip().endswith("residual=0")

    def test_all_flag_lists_false_atoms(self, capsys):
        code, out, _ = run_cli(capsys, "eval", ex("tc1.pddb"), "--all")
        assert code == 0
        assert "p(2,1) <[0,0],[1,1]>" in out

    def test_validation_error_exit_one(self, capsys, tmp_path):
        bad = tmp_path / "bad.pddb"
        bad.write_text("p(X) <[1,1],[0,0]>.\n")
        code, out, err = run_cli(capsys, "eval", str(bad))
        assert code == 1
        assert "RANGE_RESTRICTION" in err


class TestQuery:
    def test_two_bindings(self, capsys):
        code, out, _ = run_cli(capsys, "query", ex("tc1.pddb"), "p(1,Y)")
        assert code == 0
        assert out.splitlines() == [
            "p(1,2) <[1,1],[0,0]>",
            "p(1,3) <[1,1],[0,0]>",
        ]

    def test_ground_hit(self, capsys):
        code, out, _ = run_cli(capsys, "query", ex("tc1.pddb"), "p(3,2)")
        assert out.splitlines() == ["p(3,2) <[0.9,0.9],[0,0]>"]

    def test_no_match_empty_exit_zero(self, capsys):
        code, out, _ = run_cli(capsys, "query", ex("tc1.pddb"), "nosuch(X)")
        assert code == 0
        assert out == ""

    def test_json_bindings(self, capsys):
        code, out, _ = run_cli(capsys, "query", ex("tc1.pddb"), "p(1,Y)",
                               "--json")
        payload = json.loads(out)
        assert [a["bindings"]["Y"] for a in payload["answers"]] == [2, 3]


class TestProve:
    def test_certain_path_tree(self, capsys):
        code, out, _ = run_cli(capsys, "prove", ex("tc1.pddb"), "p(1,2)")
        assert code == 0
        assert "goal p(1,2) <[1,1],[0,0]>" in out
        assert "exact=true" in out

    def test_two_route_confidence(self, capsys):
        code, out, _ = run_cli(capsys, "prove", ex("ex52.pddb"), "a")
        assert code == 0
        assert "confidence=<[0.45,0.8],[0.1,0.4]>" in out

    def test_json_tree_shape(self, capsys):
        code, out, _ = run_cli(capsys, "prove", ex("tc1.pddb"), "p(1,2)",
                               "--json")
        payload = json.loads(out)
        assert payload["exact"] is True
        assert payload["tree"]["kind"] == "goal"
        kinds = {child["kind"] for child in payload["tree"]["children"]}
        assert kinds == {"rule"}

    def test_nonground_goal_rejected(self, capsys):
        code, out, err = run_cli(capsys, "prove", ex("tc1.pddb"), "p(1,Y)")
        assert code == 1
        assert "ground" in err


class TestImport:
    def test_rows_to_facts(self, capsys, tmp_path):
        csv_file = tmp_path / "edges.csv"
        csv_file.write_text("1,2,1,1,0,0\n3,2,0.9,0.9,0,0\n")
        code, out, _ = run_cli(capsys, "import", str(csv_file), "--pred", "e")
        assert code == 0
        assert out.splitlines() == [
            "e(1,2) <[1,1],[0,0]>.",
            "e(3,2) <[0.9,0.9],[0,0]>.",
        ]

    def test_bad_probability_names_row(self, capsys, tmp_path):
        csv_file = tmp_path / "edges.csv"
        csv_file.write_text("1,2,1,1,0,0\n1,3,1.5,1,0,0\n")
        code, out, err = run_cli(capsys, "import", str(csv_file), "--pred", "e")
        assert code == 1
        assert "row 2" in err

    def test_symbol_arguments_and_modespec(self, capsys, tmp_path):
        csv_file = tmp_path / "facts.csv"
        csv_file.write_text("john,0.9,0.95,0,0.05\n")
        code, out, _ = run_cli(capsys, "import", str(csv_file),
                               "--pred", "midaged", "--disj", "ind")
        assert out.splitlines() == ["midaged(john) <[0.9,0.95],[0,0.05]> ; disj=ind."]

    def test_import_reduces_confidences(self, capsys, tmp_path):
        csv_file = tmp_path / "facts.csv"
        csv_file.write_text("1,0.3,0.9,0.2,0.8\n")
        code, out, _ = run_cli(capsys, "import", str(csv_file), "--pred", "q")
        assert out.splitlines() == ["q(1) <[0.3,0.8],[0.2,0.7]>."]

    def test_inconsistent_row_rejected(self, capsys, tmp_path):
        csv_file = tmp_path / "facts.csv"
        csv_file.write_text("1,0.8,0.9,0.4,0.5\n")
        code, out, err = run_cli(capsys, "import", str(csv_file), "--pred", "q")
        assert code == 1
        assert "row 1" in err


class TestEdbFlag:
    def test_facts_merged_from_csv(self, capsys, tmp_path):
        rules = tmp_path / "rules.pddb"
        rules.write_text(
            "p(X,Y) <[1,1],[0,0]> <- e(X,Z), p(Z,Y) ; conj=ind, disj=pc.\n"
            "p(X,Y) <[1,1],[0,0]> <- e(X,Y) ; conj=ind, disj=pc.\n")
        csv_file = tmp_path / "edges.csv"
        csv_file.write_text("1,2,1,1,0,0\n2,3,1,1,0,0\n")
        code, out, _ = run_cli(capsys, "eval", str(rules),
                               "--edb", f"e={csv_file}", "--json")
        assert code == 0
        atoms = json.loads(out)["atoms"]
        assert any(a["pred"] == "p" and a["args"] == [1, 3] for a in atoms)


class TestSelftest:
    def test_small_run_passes(self, capsys):
        code, out, _ = run_cli(capsys, "selftest", "--pairs", "4", "--json",
                               "--grid-step", "0.02")
        assert code == 0
        payload = json.loads(out)
        assert payload["ok"] is True
        assert payload["ignorance"]["conj"] <= payload["ignorance"]["tolerance"]
        assert payload["independence"]["disj"] <= payload["independence"]["tolerance"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "pddb", "check", ex("election.pddb")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
