"""Command line: scripts, transcripts, exit codes, the translate workflow."""

from __future__ import annotations

import io
import subprocess
import sys
from pathlib import Path

import pytest

from ootp.cli import main, repl, run_script, run_script_text
from ootp.translate import FGH_PROGRAM_SOURCE

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def transcript(script: str) -> tuple[int, str]:
    buf = io.StringIO()
    code = run_script_text(script, buf)
    return code, buf.getvalue()


# ---------------------------------------------------------------------------
# scripts


def test_depth_proof_script_exits_zero():
    code, text = transcript("goal |- P & Q --> Q & P\napply DEPTH 8\nqed\n")
    assert code == 0
    assert "proved: |- P & Q --> Q & P" in text


def test_expect_fail_matches_failure():
    code, text = transcript("goal |- P\nexpect fail\napply DEPTH 5\n")
    assert code == 0
    assert "(failed as expected" in text


def test_expect_fail_on_success_is_an_error():
    code, text = transcript("goal |- P --> P\nexpect fail\napply DEPTH 5\n")
    assert code == 1
    assert "error at line 3: expected failure but command succeeded" in text


def test_malformed_tactic_reports_line_and_position():
    code, text = transcript("goal |- P\napply DEPTH oops\n")
    assert code == 1
    assert "error at line 2" in text
    assert "position" in text


def test_unexpected_failure_stops_script():
    code, text = transcript("goal |- P\napply basic\nqed\n")
    assert code == 1
    assert "error at line 2" in text
    assert "qed" not in text.split("error")[1]


def test_dangling_expect_is_an_error():
    code, text = transcript("goal |- P --> P\nexpect fail\n")
    assert code == 1
    assert "dangling expect" in text


def test_transcripts_are_deterministic():
    script = (SAMPLES / "conj_swap.pfs").read_text()
    a = transcript(script)
    b = transcript(script)
    assert a == b and a[0] == 0


def test_def_group_inline_and_from_file():
    code, text = transcript(
        "def_group group evenodd {\n  even(0).\n  even(s(N)) :- odd(N).\n  odd(s(N)) :- even(N).\n}\n"
    )
    assert code == 0
    assert "group evenodd: predicates even, odd (3 clauses)" in text
    code2, text2 = transcript(f"def_group file {SAMPLES / 'evenodd.defs'}\n")
    assert code2 == 0 and "group evenodd" in text2


def test_metavariable_bindings_shown_in_transcript():
    code, text = transcript("goal P(?x) |- P(c)\napply basic\nqed\n")
    assert code == 0
    assert "?x := c" in text
    assert "proved: P(c) |- P(c)" in text


def test_undo_in_script():
    code, text = transcript(
        "goal |- P --> P\napply rule imp_r\nundo\napply DEPTH 4\nqed\n"
    )
    assert code == 0


def test_missing_script_file_exits_two():
    assert run_script("/nonexistent/path.pfs") == 2


def test_sample_script_via_main():
    assert main(["prove", str(SAMPLES / "conj_swap.pfs")]) == 0


# ---------------------------------------------------------------------------
# REPL parity


def test_repl_reaches_same_states_as_script():
    commands = "goal |- P & Q --> Q & P\napply DEPTH 8\nqed\nquit\n"
    out = io.StringIO()
    assert repl(io.StringIO(commands), out) == 0
    repl_text = out.getvalue()
    _, script_text = transcript("goal |- P & Q --> Q & P\napply DEPTH 8\nqed\n")
    for line in ("g1: |- P & Q --> Q & P", "(all goals discharged)", "proved: |- P & Q --> Q & P"):
        assert line in repl_text and line in script_text


def test_repl_survives_bad_commands():
    out = io.StringIO()
    assert repl(io.StringIO("nonsense\ngoal |- P --> P\napply DEPTH 3\nqed\nquit\n"), out) == 0
    text = out.getvalue()
    assert "error: unknown command 'nonsense'" in text
    assert "proved: |- P --> P" in text


# ---------------------------------------------------------------------------
# translate subcommand


@pytest.fixture()
def imp_file(tmp_path):
    f = tmp_path / "fgh.imp"
    f.write_text(FGH_PROGRAM_SOURCE)
    return f


def test_translate_to_oo_no_assignment_tokens(imp_file, capsys):
    assert main(["translate", "--input", str(imp_file), "--to", "oo"]) == 0
    out = capsys.readouterr().out
    assert ":=" not in out
    assert "class C {" in out


def test_translate_to_fun(imp_file, capsys):
    assert main(["translate", "--input", str(imp_file), "--to", "fun"]) == 0
    assert "fun F(x,y,z: int): state =" in capsys.readouterr().out


def test_translate_check_small_grid(imp_file, capsys):
    rc = main(
        ["translate", "--input", str(imp_file), "--to", "oo", "--check", "--range=-2..2", "--fuel", "2000"]
    )
    assert rc == 0
    assert "disagreements: 0" in capsys.readouterr().out


def test_translate_unknown_entry_exits_one(imp_file):
    rc = main(
        ["translate", "--input", str(imp_file), "--to", "oo", "--check", "--entries", "NOPE", "--range=-1..1"]
    )
    assert rc == 1


def test_translate_parse_error_exits_two(tmp_path):
    bad = tmp_path / "bad.imp"
    bad.write_text("var x := 0;\nL: goto MISSING")
    assert main(["translate", "--input", str(bad), "--to", "oo"]) == 2


def test_translate_missing_file_exits_two():
    assert main(["translate", "--input", "/nope.imp", "--to", "oo"]) == 2


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as e:
        main(["translate", "--to", "oo"])  # missing --input
    assert e.value.code == 2


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "ootp.cli", "prove", str(SAMPLES / "conj_swap.pfs")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "proved: |- P & Q --> Q & P" in proc.stdout
