"""The trusted proof core.

`Theorem` values can only be minted by the primitive rules in this module;
everything above (tactics, derived rules) merely composes these primitives,
so soundness reduces to the code below.  On top of the single-judgment rules
sit the bundled forms: `SimulTheorem` (a named bundle of theorems certified
jointly) and `RuleObject` (an immutable method table whose mutually-recursive
methods map theorem bundles to theorem bundles, dispatching siblings through
an explicit self reference with a strictly decreasing fuel budget).

Position conventions: every rule locates its principal formulas either from
explicit ``pos`` arguments (what backward proof replay uses) or by defaults
that mirror the usual sequent notation - principal formulas sit at the end
of the left side and at the front of the right side.  Two-premise rules with
no hint search for the unique differing position, leftmost first.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Iterable, Mapping

from .logic import (
    ALL,
    EX,
    IFF,
    IMP,
    AND,
    NOT,
    OR,
    Conn,
    Formula,
    Param,
    Quant,
    Sequent,
    Substitution,
    Term,
    abstract_param,
    formula_params,
    instantiate_quant,
    print_formula,
    print_sequent,
)

__all__ = [
    "Theorem",
    "SimulTheorem",
    "RuleObject",
    "RuleMethod",
    "Fuel",
    "KernelError",
    "RuleError",
    "FreshnessError",
    "FuelExhausted",
    "UnknownMethodError",
    "DEFAULT_FUEL",
    "basic",
    "conj_r",
    "conj_l",
    "disj_r",
    "disj_l",
    "imp_r",
    "imp_l",
    "neg_r",
    "neg_l",
    "iff_r",
    "iff_l",
    "all_r",
    "all_l",
    "ex_r",
    "ex_l",
    "weaken_l",
    "weaken_r",
    "contract_l",
    "exchange_l",
    "exchange_r",
    "instantiate_thm",
    "simul_pack",
    "simul_project",
    "make_rule_object",
    "override_method",
    "apply_rule_object",
    "add_mint_observer",
    "remove_mint_observer",
]


class KernelError(Exception):
    """Base class for kernel failures."""


class RuleError(KernelError):
    """A primitive rule's precondition does not hold."""


class FreshnessError(RuleError):
    """Eigenvariable condition violated."""


class FuelExhausted(KernelError):
    """The call budget ran out; never a wrong answer, always an error."""


class UnknownMethodError(KernelError):
    """A rule object was asked for a method it does not have."""


# ---------------------------------------------------------------------------
# theorems

_TOKEN = object()

# test instrumentation: callables invoked on every minted theorem
_mint_observers: list[Callable[["Theorem"], None]] = []


def add_mint_observer(fn: Callable[["Theorem"], None]) -> None:
    _mint_observers.append(fn)


def remove_mint_observer(fn: Callable[["Theorem"], None]) -> None:
    _mint_observers.remove(fn)


class Theorem:
    """A kernel-certified sequent.  Not constructible outside this module."""

    __slots__ = ("_sequent", "_tag")

    def __init__(self, sequent: Sequent, tag: str, *, _token: object = None) -> None:
        if _token is not _TOKEN:
            raise TypeError("theorems can only be made by kernel rules")
        self._sequent = sequent
        self._tag = tag

    @property
    def sequent(self) -> Sequent:
        return self._sequent

    @property
    def tag(self) -> str:
        """Provenance of the last rule that minted this theorem (debugging)."""
        return self._tag

    def __repr__(self) -> str:
        return f"Theorem[{print_sequent(self._sequent)}] <{self._tag}>"


def _mk(sequent: Sequent, tag: str) -> Theorem:
    t = Theorem(sequent, tag, _token=_TOKEN)
    for fn in _mint_observers:
        fn(t)
    return t


def _norm(fs: Iterable[Formula]) -> tuple[Formula, ...]:
    return tuple(fs)


def _without(xs: tuple, i: int) -> tuple:
    return xs[:i] + xs[i + 1 :]


def _replaced(xs: tuple, i: int, v) -> tuple:
    return xs[:i] + (v,) + xs[i + 1 :]


def _inserted(xs: tuple, i: int, v) -> tuple:
    return xs[:i] + (v,) + xs[i:]


def _check_index(xs: tuple, i: int, what: str) -> int:
    if not xs:
        raise RuleError(f"{what}: sequent side is empty")
    if not -len(xs) <= i < len(xs):
        raise RuleError(f"{what}: position {i} out of range")
    return i % len(xs)


def _diff_pos(xs: tuple, ys: tuple, what: str, default: int) -> int:
    """Unique differing index of two equal-length tuples; leftmost-first."""
    if len(xs) != len(ys):
        raise RuleError(f"{what}: contexts have different lengths")
    diffs = [i for i, (x, y) in enumerate(zip(xs, ys)) if x != y]
    if not diffs:
        if not xs:
            raise RuleError(f"{what}: empty sequent side")
        return default % len(xs)
    if len(diffs) > 1:
        raise RuleError(f"{what}: contexts differ in more than one place")
    return diffs[0]


# ---------------------------------------------------------------------------
# primitive sequent rules


def basic(gamma: Iterable[Formula], a: Formula, delta: Iterable[Formula]) -> Theorem:
    """Axiom schema: ``gamma, a |- a, delta``."""
    g, d = _norm(gamma), _norm(delta)
    return _mk(Sequent(g + (a,), (a,) + d), "basic")


def conj_r(t1: Theorem, t2: Theorem, pos: int | None = None) -> Theorem:
    """From ``G |- A,D`` and ``G |- B,D`` conclude ``G |- A&B,D``."""
    s1, s2 = t1.sequent, t2.sequent
    if s1.left != s2.left:
        raise RuleError("conj_r: left contexts differ")
    i = _diff_pos(s1.right, s2.right, "conj_r", 0) if pos is None else _check_index(s1.right, pos, "conj_r")
    if len(s1.right) != len(s2.right) or s1.right[:i] != s2.right[:i] or s1.right[i + 1 :] != s2.right[i + 1 :]:
        raise RuleError("conj_r: right contexts differ outside the principal position")
    a, b = s1.right[i], s2.right[i]
    return _mk(Sequent(s1.left, _replaced(s1.right, i, Conn(AND, (a, b)))), "conj_r")


def conj_l(t: Theorem, pos: int | None = None) -> Theorem:
    """From ``G,A,B |- D`` conclude ``G,A&B |- D`` (A and B adjacent)."""
    s = t.sequent
    if len(s.left) < 2:
        raise RuleError("conj_l: needs two adjacent left formulas")
    i = len(s.left) - 2 if pos is None else _check_index(s.left, pos, "conj_l")
    if i + 1 >= len(s.left):
        raise RuleError("conj_l: no formula after the principal position")
    a, b = s.left[i], s.left[i + 1]
    return _mk(Sequent(_replaced(_without(s.left, i + 1), i, Conn(AND, (a, b))), s.right), "conj_l")


def disj_r(t: Theorem, pos: int | None = None) -> Theorem:
    """From ``G |- A,B,D`` conclude ``G |- A|B,D`` (A and B adjacent)."""
    s = t.sequent
    if len(s.right) < 2:
        raise RuleError("disj_r: needs two adjacent right formulas")
    i = 0 if pos is None else _check_index(s.right, pos, "disj_r")
    if i + 1 >= len(s.right):
        raise RuleError("disj_r: no formula after the principal position")
    a, b = s.right[i], s.right[i + 1]
    return _mk(Sequent(s.left, _replaced(_without(s.right, i + 1), i, Conn(OR, (a, b)))), "disj_r")


def disj_l(t1: Theorem, t2: Theorem, pos: int | None = None) -> Theorem:
    """From ``G,A |- D`` and ``G,B |- D`` conclude ``G,A|B |- D``."""
    s1, s2 = t1.sequent, t2.sequent
    if s1.right != s2.right:
        raise RuleError("disj_l: right contexts differ")
    i = (
        _diff_pos(s1.left, s2.left, "disj_l", len(s1.left) - 1)
        if pos is None
        else _check_index(s1.left, pos, "disj_l")
    )
    if len(s1.left) != len(s2.left) or s1.left[:i] != s2.left[:i] or s1.left[i + 1 :] != s2.left[i + 1 :]:
        raise RuleError("disj_l: left contexts differ outside the principal position")
    a, b = s1.left[i], s2.left[i]
    return _mk(Sequent(_replaced(s1.left, i, Conn(OR, (a, b))), s1.right), "disj_l")


def imp_r(t: Theorem, apos: int | None = None, bpos: int | None = None) -> Theorem:
    """From ``G,A |- B,D`` conclude ``G |- A-->B,D``."""
    s = t.sequent
    ia = len(s.left) - 1 if apos is None else _check_index(s.left, apos, "imp_r")
    ib = 0 if bpos is None else _check_index(s.right, bpos, "imp_r")
    a, b = s.left[ia], s.right[ib]
    return _mk(Sequent(_without(s.left, ia), _replaced(s.right, ib, Conn(IMP, (a, b)))), "imp_r")


def imp_l(t1: Theorem, t2: Theorem, apos: int | None = None, bpos: int | None = None) -> Theorem:
    """From ``G |- A,D`` and ``G,B |- D`` conclude ``G,A-->B |- D``."""
    s1, s2 = t1.sequent, t2.sequent
    ia = 0 if apos is None else _check_index(s1.right, apos, "imp_l")
    ib = len(s2.left) - 1 if bpos is None else _check_index(s2.left, bpos, "imp_l")
    a, b = s1.right[ia], s2.left[ib]
    if _without(s2.left, ib) != s1.left:
        raise RuleError("imp_l: left contexts do not match")
    if _without(s1.right, ia) != s2.right:
        raise RuleError("imp_l: right contexts do not match")
    return _mk(Sequent(_replaced(s2.left, ib, Conn(IMP, (a, b))), s2.right), "imp_l")


def neg_r(t: Theorem, apos: int | None = None, cpos: int = 0) -> Theorem:
    """From ``G,A |- D`` conclude ``G |- ~A,D`` (~A inserted at ``cpos``)."""
    s = t.sequent
    ia = len(s.left) - 1 if apos is None else _check_index(s.left, apos, "neg_r")
    a = s.left[ia]
    if not 0 <= cpos <= len(s.right):
        raise RuleError("neg_r: insertion position out of range")
    return _mk(Sequent(_without(s.left, ia), _inserted(s.right, cpos, Conn(NOT, (a,)))), "neg_r")


def neg_l(t: Theorem, apos: int | None = None, cpos: int | None = None) -> Theorem:
    """From ``G |- A,D`` conclude ``G,~A |- D`` (~A inserted at ``cpos``)."""
    s = t.sequent
    ia = 0 if apos is None else _check_index(s.right, apos, "neg_l")
    a = s.right[ia]
    at = len(s.left) if cpos is None else cpos
    if not 0 <= at <= len(s.left):
        raise RuleError("neg_l: insertion position out of range")
    return _mk(Sequent(_inserted(s.left, at, Conn(NOT, (a,))), _without(s.right, ia)), "neg_l")


def iff_r(t1: Theorem, t2: Theorem, pos: int | None = None) -> Theorem:
    """From ``G |- A-->B,D`` and ``G |- B-->A,D`` conclude ``G |- A<->B,D``."""
    s1, s2 = t1.sequent, t2.sequent
    if s1.left != s2.left:
        raise RuleError("iff_r: left contexts differ")
    i = _diff_pos(s1.right, s2.right, "iff_r", 0) if pos is None else _check_index(s1.right, pos, "iff_r")
    if len(s1.right) != len(s2.right) or s1.right[:i] != s2.right[:i] or s1.right[i + 1 :] != s2.right[i + 1 :]:
        raise RuleError("iff_r: right contexts differ outside the principal position")
    f1, f2 = s1.right[i], s2.right[i]
    if not (isinstance(f1, Conn) and f1.op == IMP and isinstance(f2, Conn) and f2.op == IMP):
        raise RuleError("iff_r: principal formulas are not implications")
    if f1.args[0] != f2.args[1] or f1.args[1] != f2.args[0]:
        raise RuleError("iff_r: implications are not converses of each other")
    a, b = f1.args
    return _mk(Sequent(s1.left, _replaced(s1.right, i, Conn(IFF, (a, b)))), "iff_r")


def iff_l(t: Theorem, pos: int | None = None) -> Theorem:
    """From ``G,A-->B,B-->A |- D`` conclude ``G,A<->B |- D``."""
    s = t.sequent
    if len(s.left) < 2:
        raise RuleError("iff_l: needs two adjacent left implications")
    i = len(s.left) - 2 if pos is None else _check_index(s.left, pos, "iff_l")
    if i + 1 >= len(s.left):
        raise RuleError("iff_l: no formula after the principal position")
    f1, f2 = s.left[i], s.left[i + 1]
    if not (isinstance(f1, Conn) and f1.op == IMP and isinstance(f2, Conn) and f2.op == IMP):
        raise RuleError("iff_l: principal formulas are not implications")
    if f1.args[0] != f2.args[1] or f1.args[1] != f2.args[0]:
        raise RuleError("iff_l: implications are not converses of each other")
    a, b = f1.args
    return _mk(Sequent(_replaced(_without(s.left, i + 1), i, Conn(IFF, (a, b))), s.right), "iff_l")


def _check_fresh(p: Param, fs: Iterable[Formula], rule: str) -> None:
    for f in fs:
        if p in formula_params(f):
            raise FreshnessError(f"{rule}: parameter {p.name} occurs in {print_formula(f)}")


def all_r(t: Theorem, p: Param, pos: int | None = None, var: str = "x") -> Theorem:
    """From ``G |- A[p],D`` conclude ``G |- ALL x. A,D``; p fresh for G, D."""
    s = t.sequent
    i = 0 if pos is None else _check_index(s.right, pos, "all_r")
    _check_fresh(p, s.left + _without(s.right, i), "all_r")
    gen = abstract_param(ALL, var, s.right[i], p)
    return _mk(Sequent(s.left, _replaced(s.right, i, gen)), "all_r")


def ex_l(t: Theorem, p: Param, pos: int | None = None, var: str = "x") -> Theorem:
    """From ``G,A[p] |- D`` conclude ``G,EX x. A |- D``; p fresh for G, D."""
    s = t.sequent
    i = len(s.left) - 1 if pos is None else _check_index(s.left, pos, "ex_l")
    _check_fresh(p, _without(s.left, i) + s.right, "ex_l")
    gen = abstract_param(EX, var, s.left[i], p)
    return _mk(Sequent(_replaced(s.left, i, gen), s.right), "ex_l")


def all_l(t: Theorem, u: Term, inst_pos: int | None = None, quant_pos: int | None = None) -> Theorem:
    """From ``G,A[u],ALL x. A |- D`` conclude ``G,ALL x. A |- D``."""
    s = t.sequent
    if len(s.left) < 2:
        raise RuleError("all_l: needs the instance and the quantified formula")
    i = len(s.left) - 2 if inst_pos is None else _check_index(s.left, inst_pos, "all_l")
    q = len(s.left) - 1 if quant_pos is None else _check_index(s.left, quant_pos, "all_l")
    qf = s.left[q]
    if not (isinstance(qf, Quant) and qf.q == ALL):
        raise RuleError("all_l: quantified formula is not universal")
    if i == q:
        raise RuleError("all_l: instance and quantified formula coincide")
    if s.left[i] != instantiate_quant(qf, u):
        raise RuleError("all_l: left formula is not the stated instance")
    return _mk(Sequent(_without(s.left, i), s.right), "all_l")


def ex_r(t: Theorem, u: Term, inst_pos: int | None = None, quant_pos: int | None = None) -> Theorem:
    """From ``G |- A[u],EX x. A,D`` conclude ``G |- EX x. A,D``."""
    s = t.sequent
    if len(s.right) < 2:
        raise RuleError("ex_r: needs the instance and the quantified formula")
    i = 0 if inst_pos is None else _check_index(s.right, inst_pos, "ex_r")
    q = 1 if quant_pos is None else _check_index(s.right, quant_pos, "ex_r")
    qf = s.right[q]
    if not (isinstance(qf, Quant) and qf.q == EX):
        raise RuleError("ex_r: quantified formula is not existential")
    if i == q:
        raise RuleError("ex_r: instance and quantified formula coincide")
    if s.right[i] != instantiate_quant(qf, u):
        raise RuleError("ex_r: right formula is not the stated instance")
    return _mk(Sequent(s.left, _without(s.right, i)), "ex_r")


# structural rules: sound bookkeeping needed to stitch proofs back together


def weaken_l(t: Theorem, f: Formula, pos: int | None = None) -> Theorem:
    s = t.sequent
    at = len(s.left) if pos is None else pos
    if not 0 <= at <= len(s.left):
        raise RuleError("weaken_l: insertion position out of range")
    return _mk(Sequent(_inserted(s.left, at, f), s.right), "weaken_l")


def weaken_r(t: Theorem, f: Formula, pos: int | None = None) -> Theorem:
    s = t.sequent
    at = len(s.right) if pos is None else pos
    if not 0 <= at <= len(s.right):
        raise RuleError("weaken_r: insertion position out of range")
    return _mk(Sequent(s.left, _inserted(s.right, at, f)), "weaken_r")


def contract_l(t: Theorem, keep: int, drop: int) -> Theorem:
    """Remove a duplicate left formula: ``G,A,A |- D`` gives ``G,A |- D``."""
    s = t.sequent
    k = _check_index(s.left, keep, "contract_l")
    d = _check_index(s.left, drop, "contract_l")
    if k == d:
        raise RuleError("contract_l: positions coincide")
    if s.left[k] != s.left[d]:
        raise RuleError("contract_l: formulas differ")
    return _mk(Sequent(_without(s.left, d), s.right), "contract_l")


def _permute(xs: tuple, perm: tuple[int, ...], rule: str) -> tuple:
    if sorted(perm) != list(range(len(xs))):
        raise RuleError(f"{rule}: not a permutation of 0..{len(xs) - 1}")
    return tuple(xs[j] for j in perm)


def exchange_l(t: Theorem, perm: tuple[int, ...]) -> Theorem:
    s = t.sequent
    return _mk(Sequent(_permute(s.left, perm, "exchange_l"), s.right), "exchange_l")


def exchange_r(t: Theorem, perm: tuple[int, ...]) -> Theorem:
    s = t.sequent
    return _mk(Sequent(s.left, _permute(s.right, perm, "exchange_r")), "exchange_r")


def instantiate_thm(t: Theorem, s: Substitution) -> Theorem:
    """Apply a substitution to both sides; instances of valid sequents are valid."""
    return _mk(s.apply_sequent(t.sequent), "instantiate")


# ---------------------------------------------------------------------------
# simultaneous theorems


class SimulTheorem:
    """Named, non-empty bundle of theorems certified as one unit."""

    __slots__ = ("_components",)

    def __init__(self, components: Mapping[str, Theorem], *, _token: object = None) -> None:
        if _token is not _TOKEN:
            raise TypeError("use simul_pack to build theorem bundles")
        self._components = MappingProxyType(dict(components))

    @property
    def components(self) -> Mapping[str, Theorem]:
        return self._components

    def names(self) -> tuple[str, ...]:
        return tuple(self._components)

    def __len__(self) -> int:
        return len(self._components)

    def __contains__(self, name: str) -> bool:
        return name in self._components

    def __repr__(self) -> str:
        inner = "; ".join(f"{n}: {print_sequent(t.sequent)}" for n, t in self._components.items())
        return f"SimulTheorem({inner})"


def simul_pack(parts: Mapping[str, Theorem]) -> SimulTheorem:
    if not parts:
        raise KernelError("a simultaneous theorem needs at least one component")
    for name, t in parts.items():
        if not isinstance(t, Theorem):
            raise KernelError(f"component {name!r} is not a Theorem")
    return SimulTheorem(parts, _token=_TOKEN)


def simul_project(b: SimulTheorem, name: str) -> Theorem:
    try:
        return b.components[name]
    except KeyError:
        raise KernelError(f"no component named {name!r}") from None


# ---------------------------------------------------------------------------
# rule objects

# (self, args, fuel) -> result bundle; sibling calls go through self
RuleMethod = Callable[["SelfRef", SimulTheorem, int], SimulTheorem]


@dataclass(frozen=True)
class Fuel:
    remaining: int

    def __post_init__(self) -> None:
        if self.remaining < 0:
            raise ValueError("fuel cannot be negative")


DEFAULT_FUEL = Fuel(10000)


class RuleObject:
    """Immutable table of mutually-recursive rule methods."""

    __slots__ = ("_name", "_methods")

    def __init__(self, name: str, methods: Mapping[str, RuleMethod], *, _token: object = None) -> None:
        if _token is not _TOKEN:
            raise TypeError("use make_rule_object to build rule objects")
        self._name = name
        self._methods = MappingProxyType(dict(methods))

    @property
    def name(self) -> str:
        return self._name

    @property
    def methods(self) -> Mapping[str, RuleMethod]:
        return self._methods

    def __repr__(self) -> str:
        return f"RuleObject({self._name!r}, methods={list(self._methods)})"


def make_rule_object(name: str, methods: Mapping[str, RuleMethod]) -> RuleObject:
    if not methods:
        raise KernelError("a rule object needs at least one method")
    return RuleObject(name, methods, _token=_TOKEN)


def override_method(r: RuleObject, method: str, fn: RuleMethod) -> RuleObject:
    """New rule object with one method replaced; sibling self-calls see the override."""
    table = dict(r.methods)
    table[method] = fn
    return RuleObject(r.name, table, _token=_TOKEN)


class SelfRef:
    """The self-reference handed to rule methods; every call burns one fuel."""

    __slots__ = ("_obj", "_budget")

    def __init__(self, obj: RuleObject, budget: int) -> None:
        self._obj = obj
        self._budget = budget

    @property
    def fuel(self) -> int:
        return self._budget

    def call(self, method: str, args: SimulTheorem) -> SimulTheorem:
        if self._budget <= 0:
            raise FuelExhausted(f"fuel exhausted calling {self._obj.name}.{method}")
        return _dispatch(self._obj, method, args, self._budget - 1)


def _dispatch(r: RuleObject, method: str, args: SimulTheorem, budget: int) -> SimulTheorem:
    fn = r.methods.get(method)
    if fn is None:
        raise UnknownMethodError(f"rule object {r.name!r} has no method {method!r}")
    return fn(SelfRef(r, budget), args, budget)


def apply_rule_object(
    r: RuleObject, method: str, args: SimulTheorem, fuel: Fuel | int = DEFAULT_FUEL
) -> SimulTheorem:
    """Run one method; cross-method call depth is bounded by ``fuel``."""
    budget = fuel.remaining if isinstance(fuel, Fuel) else int(fuel)
    if budget < 0:
        raise ValueError("fuel cannot be negative")
    out = _dispatch(r, method, args, budget)
    if not isinstance(out, SimulTheorem):
        raise KernelError(f"method {r.name}.{method} returned {type(out).__name__}, not a SimulTheorem")
    return out
