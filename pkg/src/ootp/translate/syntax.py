"""The goto mini-language: AST and parser.

Programs start with a ``var`` header giving every variable an integer
initial value, followed by labeled blocks.  Statements are assignments,
``goto``, ``stop``, and two-armed or one-armed conditionals; parenthesized,
semicolon-separated groups form branch bodies::

    var x := 0; y := 0; z := 0;
    F:  x := x+1; goto G
    G:  if y<z then goto F else (y := x+y; goto H)
    H:  if z>0 then (z := z-x; goto F) else stop

Parsing canonicalizes each block into an assignment prefix plus a control
tail, so every control path provably ends in ``goto`` or ``stop``.  A
conditional without ``else`` continues to the rest of the block, which must
exist; anything after a two-armed conditional is unreachable and rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

# ---------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # '+' or '-'
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, BinOp]

CMP_OPS = ("<", ">", "=", "<=", ">=")


@dataclass(frozen=True)
class Cond:
    op: str
    left: Expr
    right: Expr


# ---------------------------------------------------------------------------
# canonical statements


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class Goto:
    label: str


@dataclass(frozen=True)
class Stop:
    pass


@dataclass(frozen=True)
class IfTail:
    cond: Cond
    then: "Body"
    els: "Body"


Tail = Union[Goto, Stop, IfTail]


@dataclass(frozen=True)
class Body:
    assigns: tuple[Assign, ...]
    tail: Tail


@dataclass(frozen=True)
class ImpProgram:
    var_names: tuple[str, ...]
    inits: tuple[int, ...]
    blocks: tuple[tuple[str, Body], ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.blocks)

    def block(self, label: str) -> Body:
        for l, b in self.blocks:
            if l == label:
                return b
        raise KeyError(label)

    def init_state(self) -> dict[str, int]:
        return dict(zip(self.var_names, self.inits))


# ---------------------------------------------------------------------------
# parsing


class ImpParseError(ValueError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


_IMP_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>:=|<=|>=|[-+<>=();:]))"
)

_KEYWORDS = {"var", "goto", "if", "then", "else", "stop"}


# raw statement forms before canonicalization
@dataclass(frozen=True)
class _RawIf:
    cond: Cond
    then: tuple
    els: tuple | None


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _IMP_TOKEN.match(text, pos)
            if m is None:
                if text[pos:].strip() == "":
                    break
                raise ImpParseError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
            if m.lastgroup and m.group(m.lastgroup):
                self.toks.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
            pos = m.end()
        self.i = 0

    def peek(self, ahead: int = 0):
        k = self.i + ahead
        return self.toks[k] if k < len(self.toks) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise ImpParseError("unexpected end of input", len(self.text))
        self.i += 1
        return t

    def at(self, value: str) -> bool:
        t = self.peek()
        return t is not None and t[1] == value

    def expect(self, value: str):
        t = self.next()
        if t[1] != value:
            raise ImpParseError(f"expected {value!r}, got {t[1]!r}", t[2])
        return t

    # expressions: + and - are left-associative
    def expr(self) -> Expr:
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.next()[1]
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        t = self.peek()
        if t is None:
            raise ImpParseError("expected an expression", len(self.text))
        if t[1] == "-":
            self.next()
            inner = self.term()
            if isinstance(inner, Num):
                return Num(-inner.value)
            return BinOp("-", Num(0), inner)
        if t[1] == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        kind, value, where = self.next()
        if kind == "num":
            return Num(int(value))
        if kind == "ident" and value not in _KEYWORDS:
            return Var(value)
        raise ImpParseError(f"expected an expression, got {value!r}", where)

    def cond(self) -> Cond:
        left = self.expr()
        t = self.next()
        if t[1] not in CMP_OPS:
            raise ImpParseError(f"expected a comparison, got {t[1]!r}", t[2])
        return Cond(t[1], left, self.expr())

    # statements
    def stmt(self):
        t = self.peek()
        if t is None:
            raise ImpParseError("expected a statement", len(self.text))
        kind, value, where = t
        if value == "goto":
            self.next()
            lbl = self.next()
            if lbl[0] != "ident":
                raise ImpParseError("goto needs a label", lbl[2])
            return Goto(lbl[1])
        if value == "stop":
            self.next()
            return Stop()
        if value == "if":
            self.next()
            c = self.cond()
            self.expect("then")
            then = self.stmt_group()
            els = None
            if self.at("else"):
                self.next()
                els = self.stmt_group()
            return _RawIf(c, then, els)
        if kind == "ident" and value not in _KEYWORDS:
            self.next()
            self.expect(":=")
            return Assign(value, self.expr())
        raise ImpParseError(f"expected a statement, got {value!r}", where)

    def stmt_group(self) -> tuple:
        if self.at("("):
            self.next()
            stmts = [self.stmt()]
            while self.at(";"):
                self.next()
                stmts.append(self.stmt())
            self.expect(")")
            return tuple(stmts)
        return (self.stmt(),)

    def block_stmts(self) -> tuple:
        stmts = [self.stmt()]
        while self.at(";"):
            self.next()
            # a label following the ';' starts the next block
            t0, t1 = self.peek(), self.peek(1)
            if t0 is None or (t0[0] == "ident" and t1 is not None and t1[1] == ":"):
                break
            stmts.append(self.stmt())
        return tuple(stmts)

    def header(self) -> tuple[tuple[str, ...], tuple[int, ...]]:
        self.expect("var")
        names: list[str] = []
        inits: list[int] = []
        while True:
            t = self.next()
            if t[0] != "ident" or t[1] in _KEYWORDS:
                raise ImpParseError(f"expected a variable name, got {t[1]!r}", t[2])
            if t[1] in names:
                raise ImpParseError(f"duplicate variable {t[1]!r}", t[2])
            self.expect(":=")
            e = self.term()
            if not isinstance(e, Num):
                raise ImpParseError("initial values must be integer literals", t[2])
            names.append(t[1])
            inits.append(e.value)
            self.expect(";")
            nxt, nxt2 = self.peek(), self.peek(1)
            if nxt is None:
                break
            if nxt[0] == "ident" and nxt2 is not None and nxt2[1] == ":":
                break
        return tuple(names), tuple(inits)

    def program(self) -> ImpProgram:
        names, inits = self.header()
        blocks: list[tuple[str, tuple]] = []
        while self.peek() is not None:
            lbl = self.next()
            if lbl[0] != "ident":
                raise ImpParseError(f"expected a label, got {lbl[1]!r}", lbl[2])
            if any(l == lbl[1] for l, _ in blocks):
                raise ImpParseError(f"duplicate label {lbl[1]!r}", lbl[2])
            self.expect(":")
            blocks.append((lbl[1], self.block_stmts()))
        if not blocks:
            raise ImpParseError("program has no blocks", len(self.text))
        canon = tuple((l, _canonicalize(stmts, l)) for l, stmts in blocks)
        prog = ImpProgram(names, inits, canon)
        _validate(prog)
        return prog


def _canonicalize(stmts: tuple, label: str) -> Body:
    assigns: list[Assign] = []
    for idx, st in enumerate(stmts):
        if isinstance(st, Assign):
            assigns.append(st)
        elif isinstance(st, (Goto, Stop)):
            if idx != len(stmts) - 1:
                raise ImpParseError(f"unreachable code after transfer in block {label!r}", 0)
            return Body(tuple(assigns), st)
        elif isinstance(st, _RawIf):
            rest = stmts[idx + 1 :]
            then_body = _canonicalize(st.then, label)
            if st.els is not None:
                if rest:
                    raise ImpParseError(f"unreachable code after if/else in block {label!r}", 0)
                els_body = _canonicalize(st.els, label)
            else:
                if not rest:
                    raise ImpParseError(
                        f"conditional without else falls through at end of block {label!r}", 0
                    )
                els_body = _canonicalize(rest, label)
            return Body(tuple(assigns), IfTail(st.cond, then_body, els_body))
        else:  # pragma: no cover - parser produces only the above
            raise ImpParseError(f"bad statement in block {label!r}", 0)
    raise ImpParseError(f"control falls off the end of block {label!r}", 0)


def _expr_vars(e: Expr):
    match e:
        case Var(name):
            yield name
        case BinOp(_, l, r):
            yield from _expr_vars(l)
            yield from _expr_vars(r)
        case _:
            pass


def _validate(p: ImpProgram) -> None:
    labels = set(p.labels)
    declared = set(p.var_names)

    def check_body(b: Body, label: str) -> None:
        for a in b.assigns:
            if a.var not in declared:
                raise ImpParseError(f"assignment to undeclared variable {a.var!r} in {label!r}", 0)
            for v in _expr_vars(a.expr):
                if v not in declared:
                    raise ImpParseError(f"undeclared variable {v!r} in {label!r}", 0)
        match b.tail:
            case Goto(target):
                if target not in labels:
                    raise ImpParseError(f"goto to undefined label {target!r} in {label!r}", 0)
            case IfTail(cond, then, els):
                for v in (*_expr_vars(cond.left), *_expr_vars(cond.right)):
                    if v not in declared:
                        raise ImpParseError(f"undeclared variable {v!r} in {label!r}", 0)
                check_body(then, label)
                check_body(els, label)
            case _:
                pass

    for label, body in p.blocks:
        check_body(body, label)


def parse_imp(text: str) -> ImpProgram:
    """Parse the mini-language into a canonicalized program."""
    return _Parser(text).program()


# the classic three-variable goto tangle (labels F, G, H), used by tests and demos
FGH_PROGRAM_SOURCE = """\
var x := 0; y := 0; z := 0;
F:  x := x+1; goto G
G:  if y<z then goto F else (y := x+y; goto H)
H:  if z>0 then (z := z-x; goto F) else stop
"""


def fgh_program() -> ImpProgram:
    return parse_imp(FGH_PROGRAM_SOURCE)
