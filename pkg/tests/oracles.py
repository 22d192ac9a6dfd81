"""Independent oracles used to judge the prover, never to power it.

Propositional sequents are judged by truth tables; quantified ones by
exhaustive enumeration of finite models (domains of size 1..3).  Free
metavariables and parameters are treated as constants that the model
enumeration interprets, which is exactly validity of the universal closure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ootp.logic import (
    ALL,
    AND,
    IMP,
    NOT,
    OR,
    App,
    Bound,
    Conn,
    Formula,
    Meta,
    Param,
    Pred,
    Quant,
    Sequent,
    Term,
)


class OracleTooBig(Exception):
    """The signature is outside the envelope this oracle can enumerate."""


# ---------------------------------------------------------------------------
# truth tables


def is_propositional(s: Sequent) -> bool:
    def check(f: Formula) -> bool:
        match f:
            case Pred(_, args):
                return not args
            case Conn(_, args):
                return all(check(g) for g in args)
            case Quant():
                return False
        return False

    return all(check(f) for f in s.left + s.right)


def _prop_atoms(s: Sequent) -> list[str]:
    atoms: list[str] = []

    def walk(f: Formula) -> None:
        match f:
            case Pred(name, _):
                if name not in atoms:
                    atoms.append(name)
            case Conn(_, args):
                for g in args:
                    walk(g)
            case _:
                pass

    for f in s.left + s.right:
        walk(f)
    return atoms


def _eval_prop(f: Formula, v: dict[str, bool]) -> bool:
    match f:
        case Pred(name, _):
            return v[name]
        case Conn(op, args):
            if op == NOT:
                return not _eval_prop(args[0], v)
            a, b = (_eval_prop(g, v) for g in args)
            if op == AND:
                return a and b
            if op == OR:
                return a or b
            if op == IMP:
                return (not a) or b
            return a == b  # IFF
    raise TypeError(f)


def tt_valid(s: Sequent) -> bool:
    """Truth-table validity of ``left |- right`` (every row where all of the
    left holds makes some of the right hold)."""
    atoms = _prop_atoms(s)
    for bits in itertools.product((False, True), repeat=len(atoms)):
        v = dict(zip(atoms, bits))
        if all(_eval_prop(f, v) for f in s.left) and not any(_eval_prop(f, v) for f in s.right):
            return False
    return True


# ---------------------------------------------------------------------------
# finite models


@dataclass(frozen=True)
class _Signature:
    preds: tuple[tuple[str, int], ...]
    funs: tuple[tuple[str, int], ...]  # includes 0-ary constants
    consts: tuple[tuple, ...]  # metas and params, keyed for interpretation


def _signature(s: Sequent) -> _Signature:
    preds: dict[tuple[str, int], None] = {}
    funs: dict[tuple[str, int], None] = {}
    consts: dict[tuple, None] = {}

    def walk_term(t: Term) -> None:
        match t:
            case Meta(name, serial):
                consts[("meta", name, serial)] = None
            case Param(name, serial):
                consts[("param", name, serial)] = None
            case App(fn, args):
                funs[(fn, len(args))] = None
                for a in args:
                    walk_term(a)
            case Bound():
                pass

    def walk(f: Formula) -> None:
        match f:
            case Pred(name, args):
                preds[(name, len(args))] = None
                for a in args:
                    walk_term(a)
            case Conn(_, args):
                for g in args:
                    walk(g)
            case Quant(_, _, body):
                walk(body)

    for f in s.left + s.right:
        walk(f)
    return _Signature(tuple(preds), tuple(funs), tuple(consts))


def _model_count(sig: _Signature, d: int) -> int:
    n = 1
    for _, k in sig.preds:
        n *= 2 ** (d**k)
    for _, k in sig.funs:
        n *= d ** (d**k)
    n *= d ** len(sig.consts)
    return n


def _models(sig: _Signature, d: int):
    pred_spaces = [list(itertools.product((False, True), repeat=d**k)) for _, k in sig.preds]
    fun_spaces = [list(itertools.product(range(d), repeat=d**k)) for _, k in sig.funs]
    const_space = list(itertools.product(range(d), repeat=len(sig.consts)))
    arg_tuples = {k: list(itertools.product(range(d), repeat=k)) for _, k in sig.preds + sig.funs}
    for ptabs in itertools.product(*pred_spaces):
        ptable = {
            (name, k): dict(zip(arg_tuples[k], tab)) for (name, k), tab in zip(sig.preds, ptabs)
        }
        for ftabs in itertools.product(*fun_spaces):
            ftable = {
                (name, k): dict(zip(arg_tuples[k], tab)) for (name, k), tab in zip(sig.funs, ftabs)
            }
            for ctab in const_space:
                yield ptable, ftable, dict(zip(sig.consts, ctab))


def _eval_term(t: Term, ftable, ctable, env: tuple[int, ...]) -> int:
    match t:
        case Bound(i):
            return env[i]
        case Meta(name, serial):
            return ctable[("meta", name, serial)]
        case Param(name, serial):
            return ctable[("param", name, serial)]
        case App(fn, args):
            vals = tuple(_eval_term(a, ftable, ctable, env) for a in args)
            return ftable[(fn, len(args))][vals]
    raise TypeError(t)


def _eval_fo(f: Formula, d: int, ptable, ftable, ctable, env: tuple[int, ...]) -> bool:
    match f:
        case Pred(name, args):
            vals = tuple(_eval_term(a, ftable, ctable, env) for a in args)
            return ptable[(name, len(args))][vals]
        case Conn(op, args):
            if op == NOT:
                return not _eval_fo(args[0], d, ptable, ftable, ctable, env)
            a = _eval_fo(args[0], d, ptable, ftable, ctable, env)
            b = _eval_fo(args[1], d, ptable, ftable, ctable, env)
            if op == AND:
                return a and b
            if op == OR:
                return a or b
            if op == IMP:
                return (not a) or b
            return a == b
        case Quant(q, _, body):
            vals = (_eval_fo(body, d, ptable, ftable, ctable, (e,) + env) for e in range(d))
            return all(vals) if q == ALL else any(vals)
    raise TypeError(f)


def _holds(s: Sequent, d: int, ptable, ftable, ctable) -> bool:
    if all(_eval_fo(f, d, ptable, ftable, ctable, ()) for f in s.left):
        return any(_eval_fo(f, d, ptable, ftable, ctable, ()) for f in s.right)
    return True


def fm_countermodel(s: Sequent, max_size: int = 3, budget: int = 2_000_000):
    """First countermodel with domain size <= max_size, or None.

    Raises OracleTooBig when enumeration would exceed ``budget`` models.
    """
    sig = _signature(s)
    total = sum(_model_count(sig, d) for d in range(1, max_size + 1))
    if total > budget:
        raise OracleTooBig(f"{total} models for {sig}")
    for d in range(1, max_size + 1):
        for ptable, ftable, ctable in _models(sig, d):
            if not _holds(s, d, ptable, ftable, ctable):
                return d, ptable, ftable, ctable
    return None


def fm_valid(s: Sequent, max_size: int = 3, budget: int = 2_000_000) -> bool:
    """Valid in every interpretation over domains of size 1..max_size."""
    return fm_countermodel(s, max_size, budget) is None


def sequent_valid(s: Sequent, max_size: int = 3, budget: int = 2_000_000) -> bool:
    """Dispatch: truth tables when propositional, finite models otherwise."""
    if is_propositional(s):
        return tt_valid(s)
    return fm_valid(s, max_size, budget)


# ---------------------------------------------------------------------------
# matching (for the unifier-generality check)


def match_term(pattern: Term, target: Term, binding: dict[Meta, Term] | None = None) -> dict[Meta, Term] | None:
    """One-sided match: metas in ``pattern`` bind, the target is rigid."""
    binding = dict(binding) if binding else {}

    def go(p: Term, t: Term) -> bool:
        match p:
            case Meta():
                if p in binding:
                    return binding[p] == t
                binding[p] = t
                return True
            case App(fn, args):
                return (
                    isinstance(t, App)
                    and t.fn == fn
                    and len(t.args) == len(args)
                    and all(go(a, b) for a, b in zip(args, t.args))
                )
            case _:
                return p == t

    return binding if go(pattern, target) else None


def ground_terms(depth: int, consts: tuple[str, ...] = ("a", "b"), unary: tuple[str, ...] = ("f",)):
    """All ground terms up to the given constructor depth (tiny universes)."""
    layer: list[Term] = [App(c, ()) for c in consts]
    out = list(layer)
    for _ in range(depth):
        layer = [App(f, (t,)) for f in unary for t in layer]
        out.extend(layer)
    return out
