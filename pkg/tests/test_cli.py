"""Tests for the command-line interface."""

from pathlib import Path

import pytest

from viewrewrite.cli import EXIT_BUDGET, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE, main
from viewrewrite.fixtures import BRANCH
from viewrewrite.pebble import default_l
from viewrewrite.template import build_template

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestEvaluation:
    def test_eval(self, capsys):
        code, out, _ = run(capsys, "eval", "--spec", DATA / "a5.rpq", "--db", DATA / "a5_path.gdb")
        assert code == EXIT_OK
        assert out == "x0 x5\n"

    def test_apply_view(self, capsys):
        code, out, _ = run(capsys, "apply-view", "--spec", DATA / "a5.rpq", "--db", DATA / "a5_path.gdb")
        assert code == EXIT_OK
        assert "edge x0 V1 x3\n" in out
        assert "edge x1 V2 x5\n" in out

    def test_cert_pair_refuted_with_counterexample(self, capsys):
        code, out, _ = run(
            capsys, "cert", "--spec", DATA / "a5.rpq", "--db", DATA / "a5_path.gdb", "--pair", "x0", "x5"
        )
        assert code == EXIT_NEGATIVE
        assert out.startswith("certain false\n--- counterexample\nalphabet a\n")

    def test_cert_all(self, capsys):
        code, out, _ = run(capsys, "cert", "--spec", DATA / "branch.rpq", "--db", DATA / "branch.gdb")
        assert code == EXIT_OK
        assert out == "x y\n"

    def test_rewrite_eval(self, capsys):
        code, out, _ = run(capsys, "fixture", "Branch", "rewrite-eval", "--db", DATA / "branch.gdb", "--l", "auto")
        assert code == EXIT_OK
        assert out == "x y\n"

    def test_rewrite_eval_against_uncored_template(self, capsys):
        t = build_template(BRANCH.query_spec, BRANCH.view_spec)
        l = default_l(BRANCH.query_spec, BRANCH.view_spec, t)
        code, out, err = run(
            capsys, "fixture", "Branch", "rewrite-eval", "--db", DATA / "branch.gdb", "--no-core",
            "--log-level", "info",
        )
        assert code == EXIT_OK
        assert out == "x y\n"
        assert f"l = {l} from a {t.size}-node full template" in err

    def test_rewrite_eval_cores_by_default(self, capsys):
        code, _, err = run(
            capsys, "fixture", "Branch", "rewrite-eval", "--db", DATA / "branch.gdb", "--log-level", "info"
        )
        assert code == EXIT_OK
        assert "cored template" in err

    def test_bad_l(self, capsys):
        code, _, err = run(capsys, "fixture", "Branch", "rewrite-eval", "--db", DATA / "branch.gdb", "--l", "zero")
        assert code == EXIT_USAGE
        assert "--l expects" in err


class TestDecisions:
    def test_decide_mondet_refuted(self, capsys):
        code, out, _ = run(capsys, "decide-mondet", "--spec", DATA / "a5.rpq", "--max-len", 8)
        assert code == EXIT_NEGATIVE
        assert out == "status Refuted\nevidence_word aaaaa\nchecked_bound 8\n"

    def test_decide_mondet_bounded(self, capsys):
        code, out, _ = run(capsys, "fixture", "Branch", "decide-mondet", "--max-len", 4)
        assert code == EXIT_OK
        assert out == "status NoCounterexampleUpTo\nchecked_bound 4\n"

    def test_budget_exit_code(self, capsys):
        code, _, err = run(capsys, "fixture", "A5", "decide-mondet", "--full", "--budget", 1)
        assert code == EXIT_BUDGET
        assert "BudgetExceeded" in err


class TestPreimageCommands:
    def test_gen_3col_then_preimage(self, capsys, tmp_path):
        spec, instance = tmp_path / "k3.rpq", tmp_path / "k3.inst"
        code, _, _ = run(
            capsys, "gen-3col", "--graph", DATA / "k3.graph",
            "--spec-out", spec, "--instance-out", instance,
        )
        assert code == EXIT_OK
        assert spec.read_text().startswith("alphabet bg br gb gr rb rg\n")
        code, out, _ = run(capsys, "preimage", "--spec", spec, "--instance", instance, "--max-nodes", 3)
        assert code == EXIT_OK
        assert out.startswith("status Found\nchecked_bound 3\n--- D\n")

    def test_ceiling(self, capsys):
        code, out, _ = run(capsys, "preimage", "--spec", DATA / "a5.rpq", "--db", DATA / "a5_path.gdb", "--ceiling")
        assert code == EXIT_OK
        assert out.splitlines()[0] == "n_of_v 6"

    def test_not_a_view_image(self, capsys, tmp_path):
        instance = tmp_path / "single.inst"
        instance.write_text("edge x V2 y\n")
        code, _, _ = run(capsys, "rewrite-preimage", "--spec", DATA / "a5.rpq", "--instance", instance)
        assert code == EXIT_NEGATIVE


class TestFixturesAndGrammars:
    def test_fixture_show(self, capsys):
        code, out, _ = run(capsys, "fixture", "A5")
        assert code == EXIT_OK
        assert out == "alphabet a\nview V1 = a a a\nview V2 = a a a a\nquery Q = a a a a a\n"

    def test_fixture_reference(self, capsys):
        code, out, _ = run(capsys, "fixture", "A5", "reference", "--db", DATA / "a5_path.gdb")
        assert code == EXIT_OK
        assert out == "x0 x5\n"

    def test_unknown_fixture(self, capsys):
        code, _, _ = run(capsys, "fixture", "Nope", "show")
        assert code == EXIT_USAGE

    @pytest.mark.parametrize("alias,name", [("Ex1", "A5"), ("Ex2", "Branch"), ("Ex3", "Mod6")])
    def test_numbered_fixture_names(self, capsys, alias, name):
        code, out, _ = run(capsys, "fixture", alias, "show")
        _, expected, _ = run(capsys, "fixture", name, "show")
        assert code == EXIT_OK
        assert out == expected

    def test_numbered_fixture_command(self, capsys):
        code, out, _ = run(capsys, "fixture", "Ex2", "rewrite-eval", "--db", DATA / "branch.gdb")
        assert code == EXIT_OK
        assert out == "x y\n"

    def test_numbered_fixture_reference(self, capsys):
        code, out, _ = run(capsys, "fixture", "Ex1", "reference", "--db", DATA / "a5_path.gdb")
        assert code == EXIT_OK
        assert out == "x0 x5\n"

    def test_regularize_cfg(self, capsys):
        code, out, _ = run(capsys, "regularize-cfg", "--spec", DATA / "anbn.rpq")
        assert code == EXIT_OK
        assert out.startswith("alphabet a b\nview W = ")
        assert out.endswith("query Q = (a b)*\n")


class TestUsage:
    def test_missing_spec(self, capsys):
        code, _, err = run(capsys, "eval", "--db", DATA / "a5_path.gdb")
        assert code == EXIT_USAGE
        assert "--spec or --fixture" in err

    def test_unknown_command(self, capsys):
        assert run(capsys, "frobnicate")[0] == EXIT_USAGE

    def test_parse_error(self, capsys, tmp_path):
        spec = tmp_path / "bad.rpq"
        spec.write_text("alphabet a\nquery Q = a (\n")
        assert run(capsys, "eval", "--spec", spec, "--db", DATA / "a5_path.gdb")[0] == EXIT_USAGE

    def test_log_level_from_environment(self, capsys, monkeypatch):
        monkeypatch.setenv("VIEWREWRITE_LOG_LEVEL", "INFO")
        code, _, err = run(capsys, "fixture", "Branch", "decide-mondet", "--max-len", 3)
        assert code == EXIT_OK
        assert "[INFO] viewrewrite.decision:" in err
