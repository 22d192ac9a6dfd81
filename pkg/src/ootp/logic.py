"""First-order syntax: terms, formulas, sequents, substitution, unification.

Bound variables are de Bruijn indices (``Bound``), eigenvariables are named
``Param`` constants, and unification unknowns are serial-numbered ``Meta``
variables.  Everything is immutable; the only mutable state in the module is
the per-session serial counter (`Session`).
"""

from __future__ import annotations

import itertools
import re
import threading
from dataclasses import dataclass
from typing import Iterator, Union

# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Meta:
    """Unification unknown, written ``?name``."""

    name: str
    serial: int


@dataclass(frozen=True)
class Param:
    """Rigid eigenvariable introduced by quantifier rules."""

    name: str
    serial: int


@dataclass(frozen=True)
class Bound:
    """de Bruijn index referring to an enclosing quantifier."""

    index: int


@dataclass(frozen=True)
class App:
    """Function application; a constant is an application with no args."""

    fn: str
    args: tuple["Term", ...] = ()


Term = Union[Meta, Param, Bound, App]


def const(name: str) -> App:
    return App(name, ())


# ---------------------------------------------------------------------------
# formulas

NOT, AND, OR, IMP, IFF = "~", "&", "|", "-->", "<->"
ALL, EX = "ALL", "EX"

_BINARY = (AND, OR, IMP, IFF)


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Conn:
    op: str
    args: tuple["Formula", ...]

    def __post_init__(self) -> None:
        if self.op == NOT:
            if len(self.args) != 1:
                raise ValueError("~ takes exactly one formula")
        elif self.op in _BINARY:
            if len(self.args) != 2:
                raise ValueError(f"{self.op} takes exactly two formulas")
        else:
            raise ValueError(f"unknown connective {self.op!r}")


@dataclass(frozen=True, eq=False)
class Quant:
    q: str
    var: str  # display hint only; the binder is Bound(0) in the body
    body: "Formula"

    def __post_init__(self) -> None:
        if self.q not in (ALL, EX):
            raise ValueError(f"unknown quantifier {self.q!r}")

    # the var name is display metadata: alpha-variants are the same formula
    def __eq__(self, other: object) -> bool:
        return isinstance(other, Quant) and self.q == other.q and self.body == other.body

    def __hash__(self) -> int:
        return hash((Quant, self.q, self.body))


Formula = Union[Pred, Conn, Quant]


@dataclass(frozen=True)
class Sequent:
    left: tuple[Formula, ...]
    right: tuple[Formula, ...]


# ---------------------------------------------------------------------------
# fresh-name session


class Session:
    """Owns the serial counters and name tables for one proving session.

    ``(name, serial)`` pairs are unique per session.  Parsing resolves
    ``?name`` through `meta_named`, so the same text denotes the same Meta
    everywhere within a session; printed params re-parse to themselves the
    same way.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._meta_serial = 0
        self._param_serial = 0
        self.metas: dict[str, Meta] = {}
        self.params: dict[str, Param] = {}

    def _next_meta_serial(self) -> int:
        with self._lock:
            self._meta_serial += 1
            return self._meta_serial

    def _next_param_serial(self) -> int:
        with self._lock:
            self._param_serial += 1
            return self._param_serial

    def meta_named(self, name: str) -> Meta:
        m = self.metas.get(name)
        if m is None:
            m = Meta(name, self._next_meta_serial())
            self.metas[name] = m
        return m

    def fresh_meta(self) -> Meta:
        while True:
            n = self._next_meta_serial()
            name = f"m{n}"
            if name not in self.metas:
                m = Meta(name, n)
                self.metas[name] = m
                return m

    def fresh_param(self) -> Param:
        while True:
            n = self._next_param_serial()
            name = f"p{n}"
            if name not in self.params:
                p = Param(name, n)
                self.params[name] = p
                return p

    def clone(self) -> "Session":
        """Snapshot for dry runs; fresh names drawn here never leak back."""
        twin = Session()
        twin._meta_serial = self._meta_serial
        twin._param_serial = self._param_serial
        twin.metas = dict(self.metas)
        twin.params = dict(self.params)
        return twin


# ---------------------------------------------------------------------------
# traversal helpers


def term_metas(t: Term) -> Iterator[Meta]:
    match t:
        case Meta():
            yield t
        case App(_, args):
            for a in args:
                yield from term_metas(a)
        case _:
            pass


def term_params(t: Term) -> Iterator[Param]:
    match t:
        case Param():
            yield t
        case App(_, args):
            for a in args:
                yield from term_params(a)
        case _:
            pass


def formula_terms(f: Formula) -> Iterator[Term]:
    match f:
        case Pred(_, args):
            yield from args
        case Conn(_, args):
            for g in args:
                yield from formula_terms(g)
        case Quant(_, _, body):
            yield from formula_terms(body)


def formula_metas(f: Formula) -> set[Meta]:
    return {m for t in formula_terms(f) for m in term_metas(t)}


def formula_params(f: Formula) -> set[Param]:
    return {p for t in formula_terms(f) for p in term_params(t)}


def sequent_metas(s: Sequent) -> set[Meta]:
    out: set[Meta] = set()
    for f in s.left + s.right:
        out |= formula_metas(f)
    return out


def sequent_params(s: Sequent) -> set[Param]:
    out: set[Param] = set()
    for f in s.left + s.right:
        out |= formula_params(f)
    return out


# ---------------------------------------------------------------------------
# substitution


class Substitution:
    """Idempotent finite map from Metas to terms (occurs-check enforced).

    Normal form: no binding's right-hand side mentions a Meta that is itself
    bound, so applying the substitution once is the same as applying it to a
    fixpoint.
    """

    __slots__ = ("_bindings",)

    def __init__(self, bindings: dict[Meta, Term] | None = None) -> None:
        self._bindings: dict[Meta, Term] = dict(bindings) if bindings else {}

    @staticmethod
    def empty() -> "Substitution":
        return Substitution()

    @property
    def bindings(self) -> dict[Meta, Term]:
        return dict(self._bindings)

    def __bool__(self) -> bool:
        return bool(self._bindings)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Substitution) and self._bindings == other._bindings

    def __repr__(self) -> str:
        items = ", ".join(
            f"?{m.name}->{print_term(t)}" for m, t in sorted(self._bindings.items(), key=lambda kv: kv[0].serial)
        )
        return f"Substitution({{{items}}})"

    def lookup(self, m: Meta) -> Term | None:
        return self._bindings.get(m)

    def apply_term(self, t: Term) -> Term:
        match t:
            case Meta():
                bound = self._bindings.get(t)
                return t if bound is None else bound
            case App(fn, args):
                return App(fn, tuple(self.apply_term(a) for a in args))
            case _:
                return t

    def apply_formula(self, f: Formula) -> Formula:
        match f:
            case Pred(name, args):
                return Pred(name, tuple(self.apply_term(a) for a in args))
            case Conn(op, args):
                return Conn(op, tuple(self.apply_formula(g) for g in args))
            case Quant(q, v, body):
                return Quant(q, v, self.apply_formula(body))
        raise TypeError(f"not a formula: {f!r}")

    def apply_sequent(self, s: Sequent) -> Sequent:
        return Sequent(
            tuple(self.apply_formula(f) for f in s.left),
            tuple(self.apply_formula(f) for f in s.right),
        )

    def bind(self, m: Meta, t: Term) -> "Substitution | None":
        """Extend with ``m := t``; None if the occurs check fails."""
        t = self.apply_term(t)
        if t == m:
            return self
        if m in term_metas(t):
            return None
        one = Substitution({m: t})
        merged = {k: one.apply_term(v) for k, v in self._bindings.items()}
        merged[m] = t
        return Substitution(merged)

    def compose(self, first: "Substitution") -> "Substitution | None":
        """``self`` after ``first``: applying the result once equals applying
        ``first`` then ``self``.  None if that would break the occurs check."""
        merged: dict[Meta, Term] = {}
        for m, t in first._bindings.items():
            t2 = self.apply_term(t)
            if t2 == m:
                continue
            if m in term_metas(t2):
                return None
            merged[m] = t2
        for m, t in self._bindings.items():
            if m not in first._bindings:
                merged[m] = t
        return Substitution(merged)


def apply_subst(s: Substitution, x):
    """Apply ``s`` to a Term, Formula, or Sequent."""
    if isinstance(x, Sequent):
        return s.apply_sequent(x)
    if isinstance(x, (Pred, Conn, Quant)):
        return s.apply_formula(x)
    return s.apply_term(x)


# ---------------------------------------------------------------------------
# unification


def unify(t1: Term, t2: Term, s: Substitution | None = None) -> Substitution | None:
    """Most general unifier extending ``s``, or None.  Params are rigid."""
    s = s if s is not None else Substitution.empty()
    t1, t2 = s.apply_term(t1), s.apply_term(t2)
    match (t1, t2):
        case (Meta(), _):
            return s.bind(t1, t2)
        case (_, Meta()):
            return s.bind(t2, t1)
        case (Param(), Param()):
            return s if t1 == t2 else None
        case (Bound(i), Bound(j)):
            return s if i == j else None
        case (App(f, xs), App(g, ys)):
            if f != g or len(xs) != len(ys):
                return None
            for x, y in zip(xs, ys):
                s = unify(x, y, s)
                if s is None:
                    return None
            return s
        case _:
            return None


def unify_formulas(f1: Formula, f2: Formula, s: Substitution | None = None) -> Substitution | None:
    """Structural unification of formulas (used to close goals)."""
    s = s if s is not None else Substitution.empty()
    match (f1, f2):
        case (Pred(n1, a1), Pred(n2, a2)):
            if n1 != n2 or len(a1) != len(a2):
                return None
            for x, y in zip(a1, a2):
                s = unify(x, y, s)
                if s is None:
                    return None
            return s
        case (Conn(o1, a1), Conn(o2, a2)):
            if o1 != o2 or len(a1) != len(a2):
                return None
            for x, y in zip(a1, a2):
                s = unify_formulas(x, y, s)
                if s is None:
                    return None
            return s
        case (Quant(q1, _, b1), Quant(q2, _, b2)):
            if q1 != q2:
                return None
            return unify_formulas(b1, b2, s)
        case _:
            return None


# ---------------------------------------------------------------------------
# quantifier instantiation / abstraction


def _shiftable(t: Term) -> bool:
    match t:
        case Bound():
            return False
        case App(_, args):
            return all(_shiftable(a) for a in args)
        case _:
            return True


def _inst_term(t: Term, repl: Term, depth: int) -> Term:
    match t:
        case Bound(i):
            if i == depth:
                return repl
            return Bound(i - 1) if i > depth else t
        case App(fn, args):
            return App(fn, tuple(_inst_term(a, repl, depth) for a in args))
        case _:
            return t


def _inst_formula(f: Formula, repl: Term, depth: int) -> Formula:
    match f:
        case Pred(name, args):
            return Pred(name, tuple(_inst_term(a, repl, depth) for a in args))
        case Conn(op, args):
            return Conn(op, tuple(_inst_formula(g, repl, depth) for g in args))
        case Quant(q, v, body):
            return Quant(q, v, _inst_formula(body, repl, depth + 1))
    raise TypeError(f"not a formula: {f!r}")


def instantiate_quant(f: Formula, t: Term) -> Formula:
    """Body of the quantified ``f`` with its binder replaced by ``t``."""
    if not isinstance(f, Quant):
        raise ValueError(f"not a quantified formula: {print_formula(f)}")
    if not _shiftable(t):
        raise ValueError("replacement term may not contain bound indices")
    return _inst_formula(f.body, t, 0)


def _abs_term(t: Term, p: Param, depth: int) -> Term:
    match t:
        case Param() if t == p:
            return Bound(depth)
        case App(fn, args):
            return App(fn, tuple(_abs_term(a, p, depth) for a in args))
        case _:
            return t


def _abs_formula(f: Formula, p: Param, depth: int) -> Formula:
    match f:
        case Pred(name, args):
            return Pred(name, tuple(_abs_term(a, p, depth) for a in args))
        case Conn(op, args):
            return Conn(op, tuple(_abs_formula(g, p, depth) for g in args))
        case Quant(q, v, body):
            return Quant(q, v, _abs_formula(body, p, depth + 1))
    raise TypeError(f"not a formula: {f!r}")


def abstract_param(q: str, var: str, f: Formula, p: Param) -> Quant:
    """Quantify ``f`` over every occurrence of the param ``p``."""
    return Quant(q, var, _abs_formula(f, p, 0))


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<meta>\?[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<punct><->|-->|\|-|[~&|().,]))"
)


class ParseError(ValueError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
        if m.lastgroup and m.group(m.lastgroup):
            tokens.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
        pos = m.end()
    return tokens


class _FormulaParser:
    def __init__(self, text: str, session: Session) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.session = session
        self.bound: list[str] = []

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        tok = self.peek()
        if tok is None or tok[1] != value:
            where = tok[2] if tok else len(self.text)
            got = repr(tok[1]) if tok else "end of input"
            raise ParseError(f"expected {value!r}, got {got}", where)
        self.i += 1

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok is not None and tok[1] == value

    # precedence climbing; each binary level is right-associative
    def formula(self) -> Formula:
        return self.iff()

    def iff(self) -> Formula:
        f = self.imp()
        if self.at(IFF):
            self.next()
            return Conn(IFF, (f, self.iff()))
        return f

    def imp(self) -> Formula:
        f = self.or_()
        if self.at(IMP):
            self.next()
            return Conn(IMP, (f, self.imp()))
        return f

    def or_(self) -> Formula:
        f = self.and_()
        if self.at(OR):
            self.next()
            return Conn(OR, (f, self.or_()))
        return f

    def and_(self) -> Formula:
        f = self.unary()
        if self.at(AND):
            self.next()
            return Conn(AND, (f, self.and_()))
        return f

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        if tok[1] == NOT:
            self.next()
            return Conn(NOT, (self.unary(),))
        if tok[1] in (ALL, EX):
            self.next()
            kind, name, where = self.next()
            if kind != "ident":
                raise ParseError("expected a variable after quantifier", where)
            self.expect(".")
            self.bound.append(name)
            try:
                body = self.formula()  # widest scope to the right
            finally:
                self.bound.pop()
            return Quant(tok[1], name, body)
        return self.atom()

    def atom(self) -> Formula:
        kind, value, where = self.next()
        if value == "(":
            f = self.formula()
            self.expect(")")
            return f
        if kind != "ident":
            raise ParseError(f"unexpected token {value!r}", where)
        args: tuple[Term, ...] = ()
        if self.at("("):
            args = self.term_args()
        return Pred(value, args)

    def term_args(self) -> tuple[Term, ...]:
        self.expect("(")
        args = [self.term()]
        while self.at(","):
            self.next()
            args.append(self.term())
        self.expect(")")
        return tuple(args)

    def term(self) -> Term:
        kind, value, where = self.next()
        if kind == "meta":
            return self.session.meta_named(value[1:])
        if kind != "ident":
            raise ParseError(f"expected a term, got {value!r}", where)
        if self.at("("):
            return App(value, self.term_args())
        # innermost binder wins, then session params, else a constant
        for depth, name in enumerate(reversed(self.bound)):
            if name == value:
                return Bound(depth)
        p = self.session.params.get(value)
        if p is not None:
            return p
        return App(value, ())

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])


def parse_formula(text: str, session: Session | None = None) -> Formula:
    p = _FormulaParser(text, session if session is not None else Session())
    f = p.formula()
    p.done()
    return f


def parse_term(text: str, session: Session | None = None) -> Term:
    p = _FormulaParser(text, session if session is not None else Session())
    t = p.term()
    p.done()
    return t


def parse_sequent(text: str, session: Session | None = None) -> Sequent:
    session = session if session is not None else Session()
    p = _FormulaParser(text, session)
    left: list[Formula] = []
    if not p.at("|-"):
        left.append(p.formula())
        while p.at(","):
            p.next()
            left.append(p.formula())
    p.expect("|-")
    right: list[Formula] = []
    if p.peek() is not None:
        right.append(p.formula())
        while p.at(","):
            p.next()
            right.append(p.formula())
    p.done()
    return Sequent(tuple(left), tuple(right))


# ---------------------------------------------------------------------------
# printing

_PREC = {IFF: 1, IMP: 2, OR: 3, AND: 4}


def print_term(t: Term, depth_names: tuple[str, ...] = ()) -> str:
    match t:
        case Meta(name, _):
            return f"?{name}"
        case Param(name, _):
            return name
        case Bound(i):
            if i < len(depth_names):
                return depth_names[i]
            return f"_b{i}"  # dangling index; only reachable on ill-formed input
        case App(fn, args):
            if not args:
                return fn
            return f"{fn}({', '.join(print_term(a, depth_names) for a in args)})"
    raise TypeError(f"not a term: {t!r}")


def _pick_var(hint: str, taken: set[str]) -> str:
    if hint not in taken:
        return hint
    for k in itertools.count(1):
        cand = f"{hint}{k}"
        if cand not in taken:
            return cand
    raise AssertionError("unreachable")


def _print(f: Formula, ctx: int, at_end: bool, names: tuple[str, ...], taken: set[str]) -> str:
    match f:
        case Pred(name, args):
            if not args:
                return name
            return f"{name}({', '.join(print_term(a, names) for a in args)})"
        case Conn(op, args):
            if op == NOT:
                return "~" + _print(args[0], 5, at_end, names, taken)
            p = _PREC[op]
            wrap = p < ctx
            inner_end = at_end or wrap
            s = (
                _print(args[0], p + 1, False, names, taken)
                + f" {op} "
                + _print(args[1], p, inner_end, names, taken)
            )
            return f"({s})" if wrap else s
        case Quant(q, var, body):
            v = _pick_var(var, taken)
            inner = f"{q} {v}. " + _print(body, 0, True, (v,) + names, taken | {v})
            return inner if at_end else f"({inner})"
    raise TypeError(f"not a formula: {f!r}")


def _names_taken(f: Formula) -> set[str]:
    taken: set[str] = set()

    def walk_term(t: Term) -> None:
        match t:
            case Meta(name, _) | Param(name, _):
                taken.add(name)
            case App(fn, args):
                taken.add(fn)
                for a in args:
                    walk_term(a)
            case _:
                pass

    def walk(g: Formula) -> None:
        match g:
            case Pred(_, args):
                for a in args:
                    walk_term(a)
            case Conn(_, args):
                for a in args:
                    walk(a)
            case Quant(_, _, body):
                walk(body)

    walk(f)
    return taken


def print_formula(f: Formula) -> str:
    """Render with minimal parentheses; re-parses to ``f`` in-session."""
    return _print(f, 0, True, (), _names_taken(f))


def print_sequent(s: Sequent) -> str:
    left = ", ".join(print_formula(f) for f in s.left)
    right = ", ".join(print_formula(f) for f in s.right)
    return f"{left} |- {right}".strip()
