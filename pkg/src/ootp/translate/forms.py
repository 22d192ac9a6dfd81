"""Non-imperative OO and mutually-recursive functional forms.

Both translations are label-per-method (or label-per-function): a block's
assignment prefix is composed into field/parameter expressions by sequential
substitution, so no assignment statement survives.  The OO form updates
state only by constructing a new instance and chains via ``this``; the
functional form passes the whole state tuple explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .syntax import Assign, BinOp, Body, Cond, Expr, Goto, IfTail, ImpProgram, Num, Stop, Var

# ---------------------------------------------------------------------------
# OO form


@dataclass(frozen=True)
class OOTarget:
    """Leaf of a method body: optional construction, optional chained call.

    ``ctor_args=None`` means the untouched instance (``this``); ``call=None``
    means no further dispatch (the object itself is the result).
    """

    ctor_args: tuple[Expr, ...] | None
    call: str | None


@dataclass(frozen=True)
class OOIf:
    cond: Cond
    then: "OOBody"
    els: "OOBody"


OOBody = Union[OOTarget, OOIf]


@dataclass(frozen=True)
class OOClassProgram:
    class_name: str
    fields: tuple[str, ...]
    inits: tuple[int, ...]
    methods: tuple[tuple[str, OOBody], ...]

    def method(self, name: str) -> OOBody:
        for n, b in self.methods:
            if n == name:
                return b
        raise KeyError(name)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.methods)


# ---------------------------------------------------------------------------
# functional form


@dataclass(frozen=True)
class FunLeaf:
    """Tail position: call another function or return the state tuple."""

    call: str | None
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class FunIf:
    cond: Cond
    then: "FunBody"
    els: "FunBody"


FunBody = Union[FunLeaf, FunIf]


@dataclass(frozen=True)
class FunProgram:
    params: tuple[str, ...]
    inits: tuple[int, ...]
    funcs: tuple[tuple[str, FunBody], ...]

    def func(self, name: str) -> FunBody:
        for n, b in self.funcs:
            if n == name:
                return b
        raise KeyError(name)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.funcs)


# ---------------------------------------------------------------------------
# translation

_Env = dict[str, Expr]


def _subst(e: Expr, env: _Env) -> Expr:
    match e:
        case Var(name):
            return env[name]
        case BinOp(op, l, r):
            return BinOp(op, _subst(l, env), _subst(r, env))
        case _:
            return e


def _subst_cond(c: Cond, env: _Env) -> Cond:
    return Cond(c.op, _subst(c.left, env), _subst(c.right, env))


def _compose(assigns: tuple[Assign, ...], env: _Env) -> _Env:
    out = dict(env)
    for a in assigns:
        out[a.var] = _subst(a.expr, out)
    return out


def _identity(names: tuple[str, ...]) -> _Env:
    return {v: Var(v) for v in names}


def _is_identity(env: _Env, names: tuple[str, ...]) -> bool:
    return all(env[v] == Var(v) for v in names)


def _oo_body(body: Body, env: _Env, names: tuple[str, ...]) -> OOBody:
    env = _compose(body.assigns, env)
    match body.tail:
        case Goto(label):
            args = None if _is_identity(env, names) else tuple(env[v] for v in names)
            return OOTarget(args, label)
        case Stop():
            args = None if _is_identity(env, names) else tuple(env[v] for v in names)
            return OOTarget(args, None)
        case IfTail(cond, then, els):
            return OOIf(_subst_cond(cond, env), _oo_body(then, env, names), _oo_body(els, env, names))
    raise TypeError(body.tail)


def translate_to_oo(p: ImpProgram, class_name: str = "C") -> OOClassProgram:
    """One method per label; state changes become constructor calls."""
    names = p.var_names
    methods = tuple((label, _oo_body(body, _identity(names), names)) for label, body in p.blocks)
    return OOClassProgram(class_name, names, p.inits, methods)


def _fun_body(body: Body, env: _Env, names: tuple[str, ...]) -> FunBody:
    env = _compose(body.assigns, env)
    match body.tail:
        case Goto(label):
            return FunLeaf(label, tuple(env[v] for v in names))
        case Stop():
            return FunLeaf(None, tuple(env[v] for v in names))
        case IfTail(cond, then, els):
            return FunIf(_subst_cond(cond, env), _fun_body(then, env, names), _fun_body(els, env, names))
    raise TypeError(body.tail)


def translate_to_fun(p: ImpProgram) -> FunProgram:
    """One function per label over the full state tuple; all state explicit."""
    names = p.var_names
    funcs = tuple((label, _fun_body(body, _identity(names), names)) for label, body in p.blocks)
    return FunProgram(names, p.inits, funcs)


# ---------------------------------------------------------------------------
# source emission (display only, not meant to re-parse)


def _expr_src(e: Expr, prec: int = 0) -> str:
    match e:
        case Num(v):
            return str(v)
        case Var(name):
            return name
        case BinOp(op, l, r):
            s = f"{_expr_src(l, 1)}{op}{_expr_src(r, 2)}"
            return f"({s})" if prec >= 2 else s
    raise TypeError(e)


def _cond_src(c: Cond) -> str:
    return f"{_expr_src(c.left)} {c.op} {_expr_src(c.right)}"


def _oo_target_src(t: OOTarget, class_name: str) -> str:
    obj = "this" if t.ctor_args is None else f"new {class_name}({', '.join(_expr_src(a) for a in t.ctor_args)})"
    return obj if t.call is None else f"{obj}.{t.call}()"


def _oo_body_src(b: OOBody, class_name: str, indent: str) -> str:
    if isinstance(b, OOTarget):
        return _oo_target_src(b, class_name)
    deeper = indent + "  "
    return (
        f"if {_cond_src(b.cond)} then {_oo_body_src(b.then, class_name, deeper)}\n"
        f"{indent}else {_oo_body_src(b.els, class_name, deeper)}"
    )


def emit_oo_source(p: OOClassProgram) -> str:
    c = p.class_name
    lines = [f"class {c} {{", f"  final {', '.join(p.fields)}: int", ""]
    ctor_params = ", ".join(f"{v}{v[-1]}" for v in p.fields)
    ctor_body = "; ".join(f"{v} = {v}{v[-1]}" for v in p.fields)
    lines.append("  // constructor")
    lines.append(f"  {c}({ctor_params}: int) {{ {ctor_body} }}")
    for name, body in p.methods:
        lines.append("")
        if isinstance(body, OOTarget):
            lines.append(f"  {c} {name}() {{ {_oo_target_src(body, c)} }}")
        else:
            rendered = _oo_body_src(body, c, "    ")
            lines.append(f"  {c} {name}() {{")
            lines.append(f"    {rendered} }}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _fun_body_src(b: FunBody, indent: str) -> str:
    if isinstance(b, FunLeaf):
        args = ",".join(_expr_src(a) for a in b.args)
        return f"({args})" if b.call is None else f"{b.call}({args})"
    deeper = indent + "  "
    return (
        f"if {_cond_src(b.cond)} then {_fun_body_src(b.then, deeper)}\n"
        f"{indent}else {_fun_body_src(b.els, deeper)}"
    )


def emit_fun_source(p: FunProgram) -> str:
    tuple_ty = " * ".join(["int"] * len(p.params))
    lines = [f"type state = {tuple_ty}", ""]
    params = ",".join(p.params)
    for k, (name, body) in enumerate(p.funcs):
        head = "fun" if k == 0 else "and"
        rendered = _fun_body_src(body, "      ")
        terminator = ";" if k == len(p.funcs) - 1 else ""
        lines.append(f"{head} {name}({params}: int): state =")
        lines.append(f"      {rendered}{terminator}")
    return "\n".join(lines) + "\n"
