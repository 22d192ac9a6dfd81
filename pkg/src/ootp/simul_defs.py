"""Mutually-recursive predicate definitions as simultaneous axioms.

A definition group is a set of Horn clauses over predicates that may call
each other.  Declaring a group packs one axiom theorem per clause into a
`SimulTheorem` and builds a `RuleObject` with one derivation method per
predicate; recursive premises are dispatched through the object's self
reference, so deriving ``even(s(s(0)))`` really is the ``even`` and ``odd``
methods calling each other.

File syntax::

    group evenodd {
      even(0).
      even(s(N)) :- odd(N).
      odd(s(N)) :- even(N).
    }

Uppercase identifiers are clause variables; clauses end with a period.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from . import kernel
from .kernel import (
    DEFAULT_FUEL,
    Fuel,
    RuleObject,
    SelfRef,
    SimulTheorem,
    Theorem,
    simul_pack,
    simul_project,
)
from .logic import (
    ALL,
    AND,
    IMP,
    App,
    Bound,
    Conn,
    Formula,
    Meta,
    Pred,
    Quant,
    Term,
    Substitution,
    instantiate_quant,
    term_metas,
    unify,
)


class DefError(ValueError):
    """Ill-formed definition group."""


class DeriveFailure(Exception):
    """Internal signal: the current clause cannot derive the goal."""


@dataclass(frozen=True)
class ClauseDef:
    """Horn clause ``head :- body``; variables are Metas local to the clause."""

    head: Pred
    body: tuple[Pred, ...] = ()


@dataclass(frozen=True)
class DefGroup:
    name: str
    predicates: tuple[str, ...]
    clauses: tuple[ClauseDef, ...]
    axiom_formulas: tuple[Formula, ...]
    axioms: SimulTheorem
    derive: RuleObject


# ---------------------------------------------------------------------------
# clause compilation


def _clause_vars(c: ClauseDef) -> list[Meta]:
    seen: list[Meta] = []
    for t in c.head.args:
        for m in term_metas(t):
            if m not in seen:
                seen.append(m)
    return seen


def _body_conj(atoms: tuple[Pred, ...]) -> Formula:
    if len(atoms) == 1:
        return atoms[0]
    return Conn(AND, (atoms[0], _body_conj(atoms[1:])))


def _abstract_meta_term(t: Term, m: Meta, depth: int) -> Term:
    match t:
        case Meta() if t == m:
            return Bound(depth)
        case App(fn, args):
            return App(fn, tuple(_abstract_meta_term(a, m, depth) for a in args))
        case _:
            return t


def _abstract_meta(f: Formula, m: Meta, depth: int) -> Formula:
    match f:
        case Pred(name, args):
            return Pred(name, tuple(_abstract_meta_term(a, m, depth) for a in args))
        case Conn(op, args):
            return Conn(op, tuple(_abstract_meta(g, m, depth) for g in args))
        case Quant(q, v, body):
            return Quant(q, v, _abstract_meta(body, m, depth + 1))
    raise TypeError(f"not a formula: {f!r}")


def _clause_formula(c: ClauseDef) -> Formula:
    """``ALL vars. body --> head`` (just the head for facts)."""
    core: Formula = c.head if not c.body else Conn(IMP, (_body_conj(c.body), c.head))
    for v in reversed(_clause_vars(c)):
        core = Quant(ALL, v.name.lower(), _abstract_meta(core, v, 0))
    return core


def _check_clause(c: ClauseDef, predicates: tuple[str, ...]) -> None:
    if c.head.name not in predicates:
        raise DefError(f"clause head for undeclared predicate {c.head.name!r}")
    head_vars = set(_clause_vars(c))
    for atom in c.body:
        if atom.name not in predicates:
            raise DefError(f"body references undeclared predicate {atom.name!r}")
        for t in atom.args:
            for m in term_metas(t):
                if m not in head_vars:
                    raise DefError(f"unbound body variable {m.name!r} in clause for {c.head.name!r}")


# ---------------------------------------------------------------------------
# forward derivation through the kernel


def _ground(t: Term) -> bool:
    return next(term_metas(t), None) is None


def _fold_conj_thms(axs: tuple[Formula, ...], thms: list[Theorem]) -> Theorem:
    """Combine ``axs |- b_i`` theorems into ``axs |- b_1 & (... & b_n)``."""
    if len(thms) == 1:
        return thms[0]
    rest = _fold_conj_thms(axs, thms[1:])
    return kernel.conj_r(thms[0], rest, pos=0)


def _apply_clause(
    axs: tuple[Formula, ...],
    clause_index: int,
    clause: ClauseDef,
    witnesses: list[Term],
    premise_thms: list[Theorem],
    target: Pred,
) -> Theorem:
    """Build ``axs |- target`` from premise theorems via one clause.

    Runs imp_l against the clause's axiom formula, then peels its universal
    prefix with all_l; the intermediate partially-instantiated formulas are
    brought in by weakening.
    """
    n = len(axs)
    if not clause.body:
        if not witnesses:
            # the fact itself: axs[:i], A_i |- A_i weakened out to the full context
            t = kernel.basic(axs[:clause_index], axs[clause_index], ())
            for f in axs[clause_index + 1 :]:
                t = kernel.weaken_l(t, f)
            return t
        t = kernel.basic(axs, target, ())  # axs, target |- target
    else:
        conj = _fold_conj_thms(axs, premise_thms)  # axs |- body
        w = kernel.weaken_r(conj, target, pos=1)  # axs |- body, target
        b = kernel.basic(axs, target, ())  # axs, target |- target
        t = kernel.imp_l(w, b, apos=0, bpos=n)  # axs, body-->target |- target

    # instance chain: X_0 = axiom formula, X_k = fully instantiated core
    chain = [axs[clause_index]]
    for u in witnesses:
        chain.append(instantiate_quant(chain[-1], u))
    # left is axs + [X_k]; replace it step by step with X_{k-1}, ..., X_1
    for j in range(len(witnesses), 1, -1):
        t = kernel.weaken_l(t, chain[j - 1])  # axs, X_j, X_{j-1} |- target
        t = kernel.all_l(t, witnesses[j - 1], inst_pos=n, quant_pos=n + 1)
    if witnesses:
        t = kernel.all_l(t, witnesses[0], inst_pos=n, quant_pos=clause_index)
    elif clause.body:
        t = kernel.contract_l(t, keep=clause_index, drop=n)
    return t


def _make_derive(name: str, predicates: tuple[str, ...], clauses: tuple[ClauseDef, ...],
                 axs: tuple[Formula, ...]) -> RuleObject:
    by_pred: dict[str, list[tuple[int, ClauseDef]]] = {p: [] for p in predicates}
    for i, c in enumerate(clauses):
        by_pred[c.head.name].append((i, c))

    def method_for(pred: str):
        def run(self_ref: SelfRef, args: SimulTheorem, fuel: int) -> SimulTheorem:
            goal_thm = simul_project(args, "goal")
            target = goal_thm.sequent.right[0]
            if not isinstance(target, Pred) or target.name != pred:
                raise DefError(f"method {pred!r} asked to derive {target!r}")
            serial = itertools.count(1)
            for clause_index, clause in by_pred[pred]:
                cvars = _clause_vars(clause)
                renaming = Substitution({v: Meta(f"_{v.name}", -next(serial)) for v in cvars})
                head = renaming.apply_formula(clause.head)
                theta = Substitution.empty()
                ok = True
                for pat, t in zip(head.args, target.args):
                    theta2 = unify(pat, t, theta)
                    if theta2 is None:
                        ok = False
                        break
                    theta = theta2
                if not ok or len(head.args) != len(target.args):
                    continue
                witnesses = [theta.apply_term(renaming.apply_term(v)) for v in cvars]
                if not all(_ground(u) for u in witnesses):
                    continue  # target was not ground enough to fix the clause
                premises = [theta.apply_formula(renaming.apply_formula(b)) for b in clause.body]
                premise_thms: list[Theorem] = []
                failed = False
                for prem in premises:
                    seed = kernel.basic((), prem, ())
                    try:
                        out = self_ref.call(prem.name, simul_pack({"goal": seed}))
                    except DeriveFailure:
                        failed = True
                        break
                    premise_thms.append(simul_project(out, "derived"))
                if failed:
                    continue
                thm = _apply_clause(axs, clause_index, clause, witnesses, premise_thms, target)
                return simul_pack({"derived": thm})
            raise DeriveFailure(f"no clause derives {target}")

        return run

    return kernel.make_rule_object(f"{name}.derive", {p: method_for(p) for p in predicates})


# ---------------------------------------------------------------------------
# public operations


def declare_group(
    name: str, clauses: list[ClauseDef] | tuple[ClauseDef, ...], predicates: tuple[str, ...] | None = None
) -> DefGroup:
    clauses = tuple(clauses)
    if not clauses:
        raise DefError("a definition group needs at least one clause")
    if predicates is None:
        seen: list[str] = []
        for c in clauses:
            if c.head.name not in seen:
                seen.append(c.head.name)
        predicates = tuple(seen)
    for c in clauses:
        _check_clause(c, predicates)
    axs = tuple(_clause_formula(c) for c in clauses)
    counters: dict[str, int] = {}
    parts: dict[str, Theorem] = {}
    for i, c in enumerate(clauses):
        k = counters.get(c.head.name, 0)
        counters[c.head.name] = k + 1
        t = kernel.basic(axs[:i], axs[i], ())
        for f in axs[i + 1 :]:
            t = kernel.weaken_l(t, f)
        parts[f"{c.head.name}_{k}"] = t
    return DefGroup(
        name=name,
        predicates=predicates,
        clauses=clauses,
        axiom_formulas=axs,
        axioms=simul_pack(parts),
        derive=_make_derive(name, predicates, clauses, axs),
    )


def derive_ground(
    g: DefGroup, pred: str, args: tuple[Term, ...] | list[Term], fuel: Fuel | int = DEFAULT_FUEL
) -> Theorem | None:
    """Chain the group's clauses to certify ``Ax |- pred(args)``.

    Returns None when the fact is underivable with fuel to spare; raises
    `FuelExhausted` when the budget runs out first.
    """
    if pred not in g.predicates:
        raise DefError(f"unknown predicate {pred!r} in group {g.name!r}")
    args = tuple(args)
    if not all(_ground(a) for a in args):
        raise DefError("derive_ground requires ground argument terms")
    target = Pred(pred, args)
    seed = kernel.basic((), target, ())
    try:
        out = kernel.apply_rule_object(g.derive, pred, simul_pack({"goal": seed}), fuel)
    except DeriveFailure:
        return None
    return simul_project(out, "derived")


# ---------------------------------------------------------------------------
# definition file parsing

_DEFS_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*|\d+)|(?P<punct>:-|[(){},.]))")


class DefsParseError(ValueError):
    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (at position {position})")
        self.position = position


class _DefsParser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _DEFS_TOKEN.match(text, pos)
            if m is None:
                if text[pos:].strip() == "":
                    break
                raise DefsParseError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
            if m.lastgroup and m.group(m.lastgroup):
                self.toks.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise DefsParseError("unexpected end of input", len(self.text))
        self.i += 1
        return t

    def expect(self, value: str):
        t = self.next()
        if t[1] != value:
            raise DefsParseError(f"expected {value!r}, got {t[1]!r}", t[2])

    def at(self, value: str) -> bool:
        t = self.peek()
        return t is not None and t[1] == value

    def term(self, vars_: dict[str, Meta]) -> Term:
        kind, value, where = self.next()
        if kind != "ident":
            raise DefsParseError(f"expected a term, got {value!r}", where)
        if value[0].isupper():
            m = vars_.get(value)
            if m is None:
                m = Meta(value, len(vars_) + 1)
                vars_[value] = m
            return m
        args: tuple[Term, ...] = ()
        if self.at("("):
            args = self.term_args(vars_)
        return App(value, args)

    def term_args(self, vars_: dict[str, Meta]) -> tuple[Term, ...]:
        self.expect("(")
        out = [self.term(vars_)]
        while self.at(","):
            self.next()
            out.append(self.term(vars_))
        self.expect(")")
        return tuple(out)

    def atom(self, vars_: dict[str, Meta]) -> Pred:
        kind, value, where = self.next()
        if kind != "ident" or value[0].isupper() or value[0].isdigit():
            raise DefsParseError(f"expected a predicate, got {value!r}", where)
        args: tuple[Term, ...] = ()
        if self.at("("):
            args = self.term_args(vars_)
        return Pred(value, args)

    def clause(self) -> ClauseDef:
        vars_: dict[str, Meta] = {}
        head = self.atom(vars_)
        body: list[Pred] = []
        if self.at(":-"):
            self.next()
            body.append(self.atom(vars_))
            while self.at(","):
                self.next()
                body.append(self.atom(vars_))
        self.expect(".")
        return ClauseDef(head, tuple(body))

    def group(self) -> tuple[str, list[ClauseDef]]:
        self.expect("group")
        kind, name, where = self.next()
        if kind != "ident":
            raise DefsParseError("expected a group name", where)
        self.expect("{")
        clauses: list[ClauseDef] = []
        while not self.at("}"):
            clauses.append(self.clause())
        self.expect("}")
        return name, clauses

    def groups(self) -> list[tuple[str, list[ClauseDef]]]:
        out = []
        while self.peek() is not None:
            out.append(self.group())
        return out


def parse_defs(text: str) -> list[DefGroup]:
    """Parse and declare every ``group name { ... }`` in ``text``."""
    parsed = _DefsParser(text).groups()
    if not parsed:
        raise DefsParseError("no definition groups found", 0)
    return [declare_group(name, clauses) for name, clauses in parsed]
