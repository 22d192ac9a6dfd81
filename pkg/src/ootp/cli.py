"""Command-line entry point: proof scripts, the REPL, translation, serving.

Proof scripts are line-oriented::

    goal P & Q |- Q & P
    apply rule conj_l g1
    apply DEPTH 8
    qed

plus ``undo``, ``state``, ``def_group file <path>`` or
``def_group group <name> { clauses }``, and ``expect ok|fail`` which states
whether the *next* command must succeed or fail, making scripts
self-checking.  Exit codes: 0 success, 1 proof/equivalence failure,
2 usage or file errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

from .kernel import KernelError
from .logic import ParseError, Session, parse_sequent, print_sequent, print_term
from .simul_defs import DefError, DefGroup, DefsParseError, parse_defs
from .tactics import (
    ProofState,
    TacticError,
    new_proof,
    parse_tactic,
    proof_state_apply,
    proof_state_undo,
    qed,
)
from .translate import (
    ImpParseError,
    InterpError,
    check_equiv,
    emit_fun_source,
    emit_oo_source,
    parse_imp,
    translate_to_fun,
    translate_to_oo,
)


class CommandError(Exception):
    """A session command failed; the session itself stays usable."""


@dataclass
class ProofSession:
    """One interactive proving session: shared by scripts, REPL, and server."""

    session: Session = field(default_factory=Session)
    groups: dict[str, DefGroup] = field(default_factory=dict)
    state: ProofState | None = None
    last_theorem = None

    # ------------------------------------------------------------------
    def state_lines(self) -> list[str]:
        if self.state is None:
            return ["(no active goal)"]
        bundle = self.state.bundle
        lines = [f"{n}: {print_sequent(g.sequent)}" for n, g in bundle.goals]
        if not lines:
            lines = ["(all goals discharged)"]
        bindings = sorted(bundle.store.bindings.items(), key=lambda kv: kv[0].serial)
        lines.extend(f"?{m.name} := {print_term(t)}" for m, t in bindings)
        return lines

    def execute(self, command: str) -> list[str]:
        """Run one command; returns transcript lines.  Raises CommandError."""
        text = command.strip()
        if not text:
            return []
        op, _, rest = text.partition(" ")
        rest = rest.strip()
        handler = getattr(self, f"_cmd_{op}", None)
        if handler is None:
            raise CommandError(f"unknown command {op!r}")
        return handler(rest)

    # ------------------------------------------------------------------
    def _cmd_goal(self, rest: str) -> list[str]:
        if self.state is not None and not self.state.bundle.discharged():
            raise CommandError("a goal is already active; finish it with qed or undo it")
        if not rest:
            raise CommandError("goal needs a sequent")
        try:
            sequent = parse_sequent(rest, self.session)
        except ParseError as e:
            raise CommandError(f"bad sequent: {e}") from None
        self.state = new_proof(sequent, self.session)
        return self.state_lines()

    def _cmd_apply(self, rest: str) -> list[str]:
        if self.state is None:
            raise CommandError("no active goal; use `goal <sequent>` first")
        try:
            tactic = parse_tactic(rest)
        except ParseError as e:
            raise CommandError(f"bad tactic expression: {e}") from None
        try:
            self.state = proof_state_apply(self.state, tactic)
        except (TacticError, KernelError) as e:
            raise CommandError(str(e)) from None
        return self.state_lines()

    def _cmd_undo(self, rest: str) -> list[str]:
        if self.state is None:
            raise CommandError("no active goal")
        try:
            self.state = proof_state_undo(self.state)
        except TacticError as e:
            raise CommandError(str(e)) from None
        return self.state_lines()

    def _cmd_qed(self, rest: str) -> list[str]:
        if self.state is None:
            raise CommandError("no active goal")
        try:
            thm = qed(self.state)
        except (TacticError, KernelError) as e:
            raise CommandError(str(e)) from None
        self.last_theorem = thm
        self.state = None
        return [f"proved: {print_sequent(thm.sequent)}"]

    def _cmd_state(self, rest: str) -> list[str]:
        return self.state_lines()

    def _cmd_def_group(self, rest: str) -> list[str]:
        if rest.startswith("file "):
            path = rest[5:].strip()
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    source = fh.read()
            except OSError as e:
                raise CommandError(f"cannot read {path!r}: {e}") from None
        elif rest.startswith("group "):
            source = rest
        else:
            raise CommandError("def_group needs `file <path>` or an inline `group name { ... }`")
        try:
            groups = parse_defs(source)
        except (DefsParseError, DefError) as e:
            raise CommandError(str(e)) from None
        out = []
        for g in groups:
            self.groups[g.name] = g
            preds = ", ".join(g.predicates)
            out.append(f"group {g.name}: predicates {preds} ({len(g.clauses)} clauses)")
        return out

    def _cmd_help(self, rest: str) -> list[str]:
        return [
            "commands:",
            "  goal <sequent>           start a proof, e.g. goal P & Q |- Q & P",
            "  apply <tactic>           e.g. apply rule conj_l g1 / apply DEPTH 8",
            "  undo                     revert the last tactic",
            "  qed                      replay validations and certify the theorem",
            "  state                    show open goals and metavariable bindings",
            "  def_group file <path>    load mutually-recursive definitions",
            "  def_group group n { .. } inline definitions",
            "  expect ok|fail           (scripts) expectation for the next command",
            "  quit                     leave the session",
        ]


# ---------------------------------------------------------------------------
# scripts


def _logical_lines(text: str):
    """Join physical lines until braces balance; yields (lineno, command)."""
    pending: list[str] = []
    start = 0
    depth = 0
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip() and not pending:
            continue
        if not pending:
            start = i
        pending.append(line.strip())
        depth += line.count("{") - line.count("}")
        if depth <= 0:
            yield start, " ".join(pending)
            pending = []
            depth = 0
    if pending:
        yield start, " ".join(pending)


def run_script_text(text: str, out=None) -> int:
    """Execute a proof script; returns the exit status, echoing a transcript."""
    out = out if out is not None else sys.stdout
    session = ProofSession()
    expectation: str | None = None
    expect_line = 0
    for lineno, command in _logical_lines(text):
        print(f"> {command}", file=out)
        op = command.split(None, 1)[0]
        if op == "expect":
            arg = command.split(None, 1)[1].strip() if " " in command else ""
            if arg not in ("ok", "fail"):
                print(f"error at line {lineno}: expect needs ok or fail", file=out)
                return 1
            if expectation is not None:
                print(f"error at line {lineno}: dangling expect from line {expect_line}", file=out)
                return 1
            expectation = arg
            expect_line = lineno
            continue
        if op == "quit":
            break
        try:
            lines = session.execute(command)
            failed, message = False, ""
        except CommandError as e:
            lines, failed, message = [], True, str(e)
        expected = expectation or "ok"
        expectation = None
        if failed and expected == "fail":
            print(f"(failed as expected: {message})", file=out)
            continue
        if failed:
            print(f"error at line {lineno}: {message}", file=out)
            return 1
        if expected == "fail":
            print(f"error at line {lineno}: expected failure but command succeeded", file=out)
            return 1
        for line in lines:
            print(line, file=out)
    if expectation is not None:
        print(f"error at line {expect_line}: dangling expect", file=out)
        return 1
    return 0


def run_script(path: str, out=None) -> int:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"cannot read script {path!r}: {e}", file=sys.stderr)
        return 2
    return run_script_text(text, out)


# ---------------------------------------------------------------------------
# REPL


def repl(stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    session = ProofSession()
    print("ootp interactive prover; `help` lists commands, `quit` leaves", file=stdout)
    while True:
        print("ootp> ", end="", file=stdout, flush=True)
        raw = stdin.readline()
        if not raw:
            break
        command = raw.strip()
        if not command:
            continue
        if command == "quit":
            break
        if command.startswith("expect"):
            print("(expect only applies inside scripts)", file=stdout)
            continue
        try:
            for line in session.execute(command):
                print(line, file=stdout)
        except CommandError as e:
            print(f"error: {e}", file=stdout)
    return 0


# ---------------------------------------------------------------------------
# translate


def _parse_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition("..")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}, expected a..b") from None


def translate_cmd(args) -> int:
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            source = fh.read()
    except OSError as e:
        print(f"cannot read {args.input!r}: {e}", file=sys.stderr)
        return 2
    try:
        program = parse_imp(source)
    except ImpParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    if args.to == "oo":
        emitted = emit_oo_source(translate_to_oo(program))
    else:
        emitted = emit_fun_source(translate_to_fun(program))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(emitted)
    else:
        sys.stdout.write(emitted)
    if args.check:
        entries = args.entries.split(",") if args.entries else None
        try:
            report = check_equiv(program, args.range, entries, args.fuel)
        except InterpError as e:
            print(f"check failed: {e}", file=sys.stderr)
            return 1
        print(report.render())
        return 0 if report.ok else 1
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ootp", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="run a proof script")
    p.add_argument("script", help="path to a .pfs proof script")

    sub.add_parser("repl", help="interactive proving session")

    t = sub.add_parser("translate", help="translate a goto program")
    t.add_argument("--input", required=True, help="path to a .imp program")
    t.add_argument("--to", choices=("oo", "fun"), required=True)
    t.add_argument("--output", help="write emitted source here instead of stdout")
    t.add_argument("--check", action="store_true", help="run the three-interpreter bisimulation")
    t.add_argument("--range", type=_parse_range, default=(-5, 5), help="grid range a..b (default -5..5)")
    t.add_argument("--fuel", type=int, default=10000)
    t.add_argument("--entries", help="comma-separated entry labels (default: all)")

    s = sub.add_parser("serve", help="serve the JSON proof protocol over HTTP")
    s.add_argument("--port", type=int, required=True)
    s.add_argument("--host", default="127.0.0.1")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "prove":
        return run_script(args.script)
    if args.command == "repl":
        return repl()
    if args.command == "translate":
        return translate_cmd(args)
    if args.command == "serve":
        from .server import serve

        serve(args.port, args.host)
        return 0
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
