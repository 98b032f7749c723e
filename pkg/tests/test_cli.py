import json

import pytest

import lbemc.cli as cli
from lbemc.cli import gen_test_locks, main
from lbemc.engine import Stats, VerificationResult
from lbemc.frontend import parse_program

from conftest import MOCK_SOLVER_CMD


@pytest.fixture
def locks_file(tmp_path):
    path = tmp_path / "test_locks_2.imp"
    path.write_text(gen_test_locks(2))
    return str(path)


@pytest.fixture
def bug_file(tmp_path):
    path = tmp_path / "test_locks_2_bug.imp"
    path.write_text(gen_test_locks(2, bug=True))
    return str(path)


class TestGenTestLocks:
    def test_structure(self):
        src = gen_test_locks(3)
        assert src.count("= nondet();") == 5  # cond + one per lock
        assert src.count("assert(") == 3
        assert "while (cond != 0)" in src
        parse_program(src)

    def test_bug_flips_last_guard(self):
        safe = gen_test_locks(2)
        bug = gen_test_locks(2, bug=True)
        assert "if (p2 == 0)" in bug and "if (p2 == 0)" not in safe
        assert safe.replace("if (p2 != 0) {\n    assert", "") != bug

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            gen_test_locks(0)


class TestExitCodes:
    def test_safe_is_zero(self, locks_file):
        assert main([locks_file]) == 0

    def test_unsafe_is_one(self, bug_file, capsys):
        assert main([bug_file]) == 1
        out = capsys.readouterr().out
        assert "UNSAFE" in out and "counterexample" in out

    def test_unknown_is_two(self, tmp_path):
        path = tmp_path / "locks3.imp"
        path.write_text(gen_test_locks(3))
        code = main([str(path), "--abstraction", "cartesian",
                     "--max-refinements", "5"])
        assert code == 2

    def test_usage_error_is_three(self, capsys):
        assert main(["--no-such-flag"]) == 3
        assert main([]) == 3
        assert main(["--gen-test-locks", "0"]) == 3

    def test_missing_file_is_three(self):
        assert main(["/nonexistent/path.imp"]) == 3

    def test_parse_error_is_three(self, tmp_path):
        path = tmp_path / "bad.imp"
        path.write_text("x = 0;")
        assert main([str(path)]) == 3

    def test_broken_solver_is_three(self, locks_file, monkeypatch):
        monkeypatch.setenv(cli.SOLVER_ENV, "/nonexistent/solver --smt2")
        assert main([locks_file]) == 3

    def test_crosscheck_disagreement_is_four(self, locks_file, monkeypatch):
        bogus = VerificationResult("unsafe", Stats())

        def fake_verify(*args, **kwargs):
            return bogus

        monkeypatch.setattr(cli, "verify", fake_verify)
        assert main([locks_file, "--crosscheck", "1"]) == 4


class TestOutputs:
    def test_stats_json_schema(self, locks_file, tmp_path):
        stats = tmp_path / "out.json"
        assert main([locks_file, "--encoding", "lbe", "--abstraction", "boolean",
                     "--stats", str(stats)]) == 0
        payload = json.loads(stats.read_text())
        assert payload["verdict"] == "safe"
        assert payload["refinement_steps"] == 0
        assert payload["predicates"] == {"total": 0, "avg": 0, "max": 0}
        assert payload["art_size"] <= 5
        assert payload["rule_applications"] > 0
        assert payload["wall_time_ms"] > 0

    def test_stats_deterministic_modulo_wall_time(self, locks_file, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main([locks_file, "--stats", str(a)])
        main([locks_file, "--stats", str(b)])
        da, db = json.loads(a.read_text()), json.loads(b.read_text())
        da.pop("wall_time_ms")
        db.pop("wall_time_ms")
        assert da == db

    def test_dot_and_trace_outputs(self, locks_file, tmp_path):
        cfa_dot = tmp_path / "cfa.dot"
        art_dot = tmp_path / "art.dot"
        trace = tmp_path / "trace.jsonl"
        main([locks_file, "--dot-cfa", str(cfa_dot), "--dot-art", str(art_dot),
              "--trace", str(trace)])
        assert cfa_dot.read_text().startswith("digraph cfa {")
        assert art_dot.read_text().startswith("digraph art {")
        for line in trace.read_text().strip().splitlines():
            assert json.loads(line)["rule"] in (0, 1, 2)

    def test_sbe_stats_differ(self, locks_file, tmp_path):
        stats = tmp_path / "sbe.json"
        assert main([locks_file, "--encoding", "sbe", "--abstraction",
                     "cartesian", "--stats", str(stats)]) == 0
        payload = json.loads(stats.read_text())
        assert payload["refinement_steps"] > 0
        assert payload["rule_applications"] == 0

    def test_generator_to_stdout_and_file(self, tmp_path, capsys):
        assert main(["--gen-test-locks", "2"]) == 0
        out = capsys.readouterr().out
        assert "int lk2;" in out
        target = tmp_path / "locks.imp"
        assert main(["--gen-test-locks", "2", "--bug", "-o", str(target)]) == 0
        assert "p2 == 0" in target.read_text()


class TestInputModes:
    def test_stdin(self, monkeypatch):
        import io

        monkeypatch.setattr("sys.stdin", io.StringIO(gen_test_locks(1)))
        assert main(["-"]) == 0

    def test_crosscheck_agreement(self, bug_file, capsys):
        assert main([bug_file, "--crosscheck", "1"]) == 1
        assert "verdicts agree" in capsys.readouterr().err

    def test_external_solver_backend(self, locks_file, monkeypatch):
        monkeypatch.setenv(cli.SOLVER_ENV, MOCK_SOLVER_CMD)
        assert main([locks_file, "--encoding", "sbe",
                     "--abstraction", "cartesian"]) == 0
