"""Interpreters for the three program forms, plus the bisimulation check.

Each form has its own interpreter; on every tested input the three must
agree on termination status and final state, which is what `check_equiv`
verifies over a grid of initial states.  One step is one block, method, or
function entry, so terminating runs align step-for-step.

Two backends exist: the pure tree-walking interpreters in this module (the
reference semantics) and compiled table-driven machines (`_speedups`, built
from Cython) selected at import when available.  Set ``OOTP_PURE=1`` to
force the pure backend.  The compiled machines use 64-bit arithmetic with
overflow detection; any run that overflows is transparently re-run on the
unbounded pure interpreter.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from . import tables
from .forms import FunIf, FunProgram, OOClassProgram, OOIf, translate_to_fun, translate_to_oo
from .syntax import BinOp, Cond, Expr, Goto, ImpProgram, Num, Stop, Var

TERMINATED = "terminated"
FUEL_EXHAUSTED = "fuel_exhausted"

_INT64_MAX = (1 << 63) - 1


class InterpError(ValueError):
    """Unknown entry point or unusable initial state."""


@dataclass(frozen=True)
class RunResult:
    status: str
    final_state: tuple[int, ...] | None
    steps: int

    def state_dict(self, names: Sequence[str]) -> dict[str, int] | None:
        if self.final_state is None:
            return None
        return dict(zip(names, self.final_state))


_speedups = None
if not os.environ.get("OOTP_PURE"):
    try:
        from . import _speedups  # type: ignore[attr-defined]
    except ImportError:
        _speedups = None


def active_backend() -> str:
    return "compiled" if _speedups is not None else "pure"


def _resolve_backend(backend: str | None) -> str:
    if backend is None:
        return active_backend()
    if backend not in ("pure", "compiled"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "compiled" and _speedups is None:
        raise ValueError("compiled backend is not available")
    return backend


def _norm_init(names: tuple[str, ...], inits: tuple[int, ...], init) -> tuple[int, ...]:
    if init is None:
        return inits
    if isinstance(init, Mapping):
        missing = [v for v in names if v not in init]
        if missing:
            raise InterpError(f"initial state is missing {missing}")
        return tuple(int(init[v]) for v in names)
    vals = tuple(int(v) for v in init)
    if len(vals) != len(names):
        raise InterpError(f"initial state needs {len(names)} values, got {len(vals)}")
    return vals


def _check_entry(labels: tuple[str, ...], entry: str) -> None:
    if entry not in labels:
        raise InterpError(f"unknown entry point {entry!r}")


def _check_fuel(fuel: int) -> None:
    if fuel <= 0:
        raise InterpError("fuel must be positive")


# ---------------------------------------------------------------------------
# pure interpreters


def _eval(e: Expr, env: dict[str, int]) -> int:
    match e:
        case Num(v):
            return v
        case Var(name):
            return env[name]
        case BinOp(op, l, r):
            a, b = _eval(l, env), _eval(r, env)
            return a + b if op == "+" else a - b
    raise TypeError(e)


def _test(c: Cond, env: dict[str, int]) -> bool:
    a, b = _eval(c.left, env), _eval(c.right, env)
    match c.op:
        case "<":
            return a < b
        case ">":
            return a > b
        case "=":
            return a == b
        case "<=":
            return a <= b
        case ">=":
            return a >= b
    raise TypeError(c.op)


def _imp_pure(p: ImpProgram, entry: str, init: tuple[int, ...], fuel: int) -> RunResult:
    blocks = dict(p.blocks)
    state = dict(zip(p.var_names, init))
    label = entry
    steps = 0
    while True:
        if steps >= fuel:
            return RunResult(FUEL_EXHAUSTED, None, fuel)
        steps += 1
        body = blocks[label]
        while True:
            for a in body.assigns:
                state[a.var] = _eval(a.expr, state)
            tail = body.tail
            if isinstance(tail, Goto):
                label = tail.label
                break
            if isinstance(tail, Stop):
                return RunResult(TERMINATED, tuple(state[v] for v in p.var_names), steps)
            body = tail.then if _test(tail.cond, state) else tail.els


def _oo_pure(c: OOClassProgram, entry: str, init: tuple[int, ...], fuel: int) -> RunResult:
    methods = dict(c.methods)
    inst = init
    method = entry
    steps = 0
    while True:
        if steps >= fuel:
            return RunResult(FUEL_EXHAUSTED, None, fuel)
        steps += 1
        body = methods[method]
        env = dict(zip(c.fields, inst))
        while isinstance(body, OOIf):
            body = body.then if _test(body.cond, env) else body.els
        nxt = inst if body.ctor_args is None else tuple(_eval(a, env) for a in body.ctor_args)
        if body.call is None:
            return RunResult(TERMINATED, nxt, steps)
        inst = nxt
        method = body.call


def _fun_pure(f: FunProgram, entry: str, init: tuple[int, ...], fuel: int) -> RunResult:
    funcs = dict(f.funcs)
    state = init
    name = entry
    steps = 0
    while True:
        if steps >= fuel:
            return RunResult(FUEL_EXHAUSTED, None, fuel)
        steps += 1
        body = funcs[name]
        env = dict(zip(f.params, state))
        while isinstance(body, FunIf):
            body = body.then if _test(body.cond, env) else body.els
        state = tuple(_eval(a, env) for a in body.args)
        if body.call is None:
            return RunResult(TERMINATED, state, steps)
        name = body.call


# ---------------------------------------------------------------------------
# compiled machines (built once per program, reused across the grid)


@lru_cache(maxsize=64)
def _imp_machine(p: ImpProgram):
    t = tables.compile_imp(p)
    return _speedups.ImpMachine(t.nvars, t.exprs, t.conds, t.units)


@lru_cache(maxsize=64)
def _oo_machine(c: OOClassProgram):
    t = tables.compile_oo(c)
    return _speedups.ChainMachine(t.nvars, t.exprs, t.conds, t.units, t.leaf_args)


@lru_cache(maxsize=64)
def _fun_machine(f: FunProgram):
    t = tables.compile_fun(f)
    return _speedups.ChainMachine(t.nvars, t.exprs, t.conds, t.units, t.leaf_args)


def _run_machine(machine, entry_idx: int, init: tuple[int, ...], fuel: int) -> RunResult | None:
    if any(abs(v) > _INT64_MAX >> 1 for v in init):
        return None
    try:
        status, state, steps = machine.run(entry_idx, list(init), fuel)
    except OverflowError:
        return None
    if status == 0:
        return RunResult(TERMINATED, tuple(state), steps)
    return RunResult(FUEL_EXHAUSTED, None, steps)


# ---------------------------------------------------------------------------
# public entry points


def interp_imp(p: ImpProgram, entry: str, init=None, fuel: int = 10000, backend: str | None = None) -> RunResult:
    _check_entry(p.labels, entry)
    _check_fuel(fuel)
    vals = _norm_init(p.var_names, p.inits, init)
    if _resolve_backend(backend) == "compiled":
        out = _run_machine(_imp_machine(p), p.labels.index(entry), vals, fuel)
        if out is not None:
            return out
    return _imp_pure(p, entry, vals, fuel)


def interp_oo(c: OOClassProgram, entry: str, init=None, fuel: int = 10000, backend: str | None = None) -> RunResult:
    _check_entry(c.labels, entry)
    _check_fuel(fuel)
    vals = _norm_init(c.fields, c.inits, init)
    if _resolve_backend(backend) == "compiled":
        out = _run_machine(_oo_machine(c), c.labels.index(entry), vals, fuel)
        if out is not None:
            return out
    return _oo_pure(c, entry, vals, fuel)


def interp_fun(f: FunProgram, entry: str, init=None, fuel: int = 10000, backend: str | None = None) -> RunResult:
    _check_entry(f.labels, entry)
    _check_fuel(fuel)
    vals = _norm_init(f.params, f.inits, init)
    if _resolve_backend(backend) == "compiled":
        out = _run_machine(_fun_machine(f), f.labels.index(entry), vals, fuel)
        if out is not None:
            return out
    return _fun_pure(f, entry, vals, fuel)


# ---------------------------------------------------------------------------
# bisimulation over a grid


@dataclass(frozen=True)
class Disagreement:
    entry: str
    init: tuple[int, ...]
    imp: RunResult
    oo: RunResult
    fun: RunResult


@dataclass(frozen=True)
class EquivReport:
    var_names: tuple[str, ...]
    ranges: tuple[tuple[int, int], ...]
    entries: tuple[str, ...]
    fuel: int
    backend: str
    runs: int
    terminated: int
    exhausted: int
    disagreements: tuple[Disagreement, ...]
    elapsed: float

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def render(self) -> str:
        rng = ", ".join(f"{v} in [{lo}..{hi}]" for v, (lo, hi) in zip(self.var_names, self.ranges))
        lines = [
            f"bisimulation over {rng}; entries {', '.join(self.entries)}; fuel {self.fuel}",
            f"runs: {self.runs}  terminated: {self.terminated}  fuel_exhausted: {self.exhausted}",
            f"disagreements: {len(self.disagreements)}",
        ]
        for d in self.disagreements:
            lines.append(
                f"  entry {d.entry} init {d.init}: imp={d.imp} oo={d.oo} fun={d.fun}"
            )
        return "\n".join(lines)


def _norm_ranges(p: ImpProgram, ranges) -> tuple[tuple[int, int], ...]:
    if isinstance(ranges, Mapping):
        try:
            return tuple((int(ranges[v][0]), int(ranges[v][1])) for v in p.var_names)
        except KeyError as e:
            raise InterpError(f"range missing for variable {e.args[0]!r}") from None
    lo, hi = ranges
    return tuple((int(lo), int(hi)) for _ in p.var_names)


def _grid(ranges: tuple[tuple[int, int], ...]) -> Iterable[tuple[int, ...]]:
    if not ranges:
        yield ()
        return
    (lo, hi), rest = ranges[0], ranges[1:]
    for v in range(lo, hi + 1):
        for tail in _grid(rest):
            yield (v,) + tail


def check_equiv(
    p: ImpProgram,
    ranges=(-5, 5),
    entries: Sequence[str] | None = None,
    fuel: int = 10000,
    backend: str | None = None,
) -> EquivReport:
    """Run all three interpreters over every (entry, initial state) in the
    grid; disagreements are report content, not exceptions."""
    be = _resolve_backend(backend)
    rs = _norm_ranges(p, ranges)
    ents = tuple(entries) if entries is not None else p.labels
    for e in ents:
        _check_entry(p.labels, e)
    _check_fuel(fuel)
    oo = translate_to_oo(p)
    fn = translate_to_fun(p)
    runs = terminated = exhausted = 0
    bad: list[Disagreement] = []
    t0 = time.perf_counter()
    for entry in ents:
        for init in _grid(rs):
            r_imp = interp_imp(p, entry, init, fuel, be)
            r_oo = interp_oo(oo, entry, init, fuel, be)
            r_fun = interp_fun(fn, entry, init, fuel, be)
            runs += 1
            if r_imp.status == TERMINATED:
                terminated += 1
            else:
                exhausted += 1
            if not (r_imp == r_oo == r_fun):
                bad.append(Disagreement(entry, init, r_imp, r_oo, r_fun))
    elapsed = time.perf_counter() - t0
    return EquivReport(
        var_names=p.var_names,
        ranges=rs,
        entries=ents,
        fuel=fuel,
        backend=be,
        runs=runs,
        terminated=terminated,
        exhausted=exhausted,
        disagreements=tuple(bad),
        elapsed=elapsed,
    )
