"""Flattening of the three program forms into integer tables.

The compiled backend executes these tables; each form has its own compiler
so the imperative, OO, and functional routes stay separate all the way down.
Expressions become postfix streams, conditions index expression pairs, and
each block/method/function becomes one flat instruction stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .forms import FunIf, FunLeaf, FunProgram, OOClassProgram, OOIf, OOTarget
from .syntax import BinOp, Body, Cond, Expr, Goto, IfTail, ImpProgram, Num, Stop, Var

# expression opcodes
E_CONST, E_VAR, E_ADD, E_SUB = 0, 1, 2, 3
# instruction opcodes
I_ASSIGN, I_IF, I_GOTO, I_STOP, I_LEAF = 0, 1, 2, 3, 4
# comparison codes, aligned with syntax.CMP_OPS
CMP_CODES = {"<": 0, ">": 1, "=": 2, "<=": 3, ">=": 4}

MAX_EVAL_DEPTH = 64


@dataclass
class Tables:
    nvars: int
    exprs: list[list[int]] = field(default_factory=list)
    conds: list[tuple[int, int, int]] = field(default_factory=list)
    units: list[list[int]] = field(default_factory=list)
    leaf_args: list[int] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)

    def entry_index(self, label: str) -> int:
        return self.labels.index(label)


class _Builder:
    def __init__(self, var_names: tuple[str, ...], labels: tuple[str, ...]):
        self.vars = {v: i for i, v in enumerate(var_names)}
        self.labels = {l: i for i, l in enumerate(labels)}
        self.t = Tables(nvars=len(var_names), labels=list(labels))
        self._expr_ids: dict[Expr, int] = {}
        self._cond_ids: dict[Cond, int] = {}

    def expr(self, e: Expr) -> int:
        hit = self._expr_ids.get(e)
        if hit is not None:
            return hit
        code: list[int] = []
        depth = self._flatten_expr(e, code)
        if depth > MAX_EVAL_DEPTH:
            raise ValueError("expression too deep for the compiled backend")
        self._expr_ids[e] = len(self.t.exprs)
        self.t.exprs.append(code)
        return self._expr_ids[e]

    def _flatten_expr(self, e: Expr, out: list[int]) -> int:
        match e:
            case Num(v):
                out.extend((E_CONST, v))
                return 1
            case Var(name):
                out.extend((E_VAR, self.vars[name]))
                return 1
            case BinOp(op, l, r):
                dl = self._flatten_expr(l, out)
                dr = self._flatten_expr(r, out)
                out.append(E_ADD if op == "+" else E_SUB)
                return max(dl, dr + 1)
        raise TypeError(e)

    def cond(self, c: Cond) -> int:
        hit = self._cond_ids.get(c)
        if hit is not None:
            return hit
        entry = (CMP_CODES[c.op], self.expr(c.left), self.expr(c.right))
        self._cond_ids[c] = len(self.t.conds)
        self.t.conds.append(entry)
        return self._cond_ids[c]


def compile_imp(p: ImpProgram) -> Tables:
    b = _Builder(p.var_names, p.labels)

    def flat(body: Body, out: list[int]) -> None:
        for a in body.assigns:
            out.extend((I_ASSIGN, b.vars[a.var], b.expr(a.expr)))
        match body.tail:
            case Goto(label):
                out.extend((I_GOTO, b.labels[label]))
            case Stop():
                out.append(I_STOP)
            case IfTail(cond, then, els):
                out.extend((I_IF, b.cond(cond), -1))
                patch = len(out) - 1
                flat(then, out)
                out[patch] = len(out)
                flat(els, out)

    for _, body in p.blocks:
        code: list[int] = []
        flat(body, code)
        b.t.units.append(code)
    return b.t


def compile_oo(p: OOClassProgram) -> Tables:
    b = _Builder(p.fields, p.labels)

    def flat(body, out: list[int]) -> None:
        if isinstance(body, OOTarget):
            if body.ctor_args is None:
                argbase, new_flag = -1, 0
            else:
                argbase, new_flag = len(b.t.leaf_args), 1
                b.t.leaf_args.extend(b.expr(a) for a in body.ctor_args)
            call = -1 if body.call is None else b.labels[body.call]
            out.extend((I_LEAF, new_flag, call, argbase))
        else:
            assert isinstance(body, OOIf)
            out.extend((I_IF, b.cond(body.cond), -1))
            patch = len(out) - 1
            flat(body.then, out)
            out[patch] = len(out)
            flat(body.els, out)

    for _, body in p.methods:
        code: list[int] = []
        flat(body, code)
        b.t.units.append(code)
    return b.t


def compile_fun(p: FunProgram) -> Tables:
    b = _Builder(p.params, p.labels)

    def flat(body, out: list[int]) -> None:
        if isinstance(body, FunLeaf):
            argbase = len(b.t.leaf_args)
            b.t.leaf_args.extend(b.expr(a) for a in body.args)
            call = -1 if body.call is None else b.labels[body.call]
            out.extend((I_LEAF, 1, call, argbase))
        else:
            assert isinstance(body, FunIf)
            out.extend((I_IF, b.cond(body.cond), -1))
            patch = len(out) - 1
            flat(body.then, out)
            out[patch] = len(out)
            flat(body.els, out)

    for _, body in p.funcs:
        code: list[int] = []
        flat(body, code)
        b.t.units.append(code)
    return b.t
