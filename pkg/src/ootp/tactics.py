"""Backward proof: goal bundles, tactics, tacticals, and replay.

A tactic is an object whose methods map a goal bundle to a lazy sequence of
outcomes; each outcome is a new bundle plus the forward justification for the
step.  Failure is an empty sequence, which is what makes ORELSE and
backtracking compose.  Every backward step records a `Step`; when a proof is
finished the steps are compiled into a single rule object whose chained
methods replay the whole proof forward through the kernel, one fuel unit per
inference.

Goals in a bundle always carry the accumulated substitution applied, so
binding a shared metavariable while closing one goal instantly updates every
sibling goal.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Mapping

from . import kernel
from .kernel import (
    DEFAULT_FUEL,
    Fuel,
    RuleObject,
    SimulTheorem,
    Theorem,
    simul_pack,
)
from .logic import (
    ALL,
    AND,
    EX,
    IFF,
    IMP,
    NOT,
    OR,
    Conn,
    Formula,
    Meta,
    Param,
    ParseError,
    Pred,
    Quant,
    Sequent,
    Session,
    Substitution,
    instantiate_quant,
    parse_sequent,
    print_sequent,
    sequent_metas,
    term_metas,
    term_params,
    unify_formulas,
)

REUSE_CAP = 3  # per-goal, per-formula bound on all_l/ex_r contraction


class TacticError(Exception):
    """Base class for tactic-layer failures."""


class TacticFailed(TacticError):
    """A tactic that had to succeed yielded no outcomes."""


class ReplayError(TacticError):
    """Forward replay did not reconstruct the goal it was supposed to."""


class ResidualMetaError(TacticError):
    """The finished proof still contains uninstantiated metavariables."""


class TacticFuelError(TacticError):
    """REPEAT exceeded its iteration budget."""


class UndoAtRootError(TacticError):
    """Undo requested with no step to undo."""


# ---------------------------------------------------------------------------
# goals and bundles


@dataclass(frozen=True)
class Goal:
    sequent: Sequent


def _goal_key(name: str) -> tuple[int, str]:
    if name.startswith("g") and name[1:].isdigit():
        return (int(name[1:]), name)
    return (1 << 30, name)


@dataclass(frozen=True)
class GoalBundle:
    """Named goals sharing one metavariable store.

    ``param_deps`` maps each proof-introduced eigenvariable to the set of
    metavariables that were already alive when it was introduced; those metas
    may never be bound to terms mentioning the param (the kernel re-checks
    freshness at replay, this just prunes unsound unifiers during search).
    """

    goals: tuple[tuple[str, Goal], ...]
    store: Substitution
    param_deps: tuple[tuple[Param, frozenset[Meta]], ...]
    reuse: tuple[tuple[str, Formula, int], ...]
    next_id: int
    session: Session = field(compare=False, repr=False)

    @property
    def mapping(self) -> dict[str, Goal]:
        return dict(self.goals)

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.goals)

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.goals)

    def discharged(self) -> bool:
        return not self.goals

    def first_goal(self) -> str | None:
        if not self.goals:
            return None
        return min((n for n, _ in self.goals), key=_goal_key)

    def live_metas(self) -> set[Meta]:
        out: set[Meta] = set()
        for _, g in self.goals:
            out |= sequent_metas(g.sequent)
        for t in self.store.bindings.values():
            out |= set(term_metas(t))
        return out

    def reuse_count(self, goal: str, f: Formula) -> int:
        for n, g, c in self.reuse:
            if n == goal and g == f:
                return c
        return 0

    def __str__(self) -> str:
        if not self.goals:
            return "(no goals)"
        return "\n".join(f"{n}: {print_sequent(g.sequent)}" for n, g in self.goals)


def new_bundle(sequent: Sequent, session: Session | None = None) -> GoalBundle:
    session = session if session is not None else Session()
    return GoalBundle(
        goals=(("g1", Goal(sequent)),),
        store=Substitution.empty(),
        param_deps=(),
        reuse=(),
        next_id=2,
        session=session,
    )


def _merge_store(bundle: GoalBundle, store: Substitution) -> dict | None:
    """New goal tuple/store after extending the store; None if a binding
    would smuggle a param past the metas it must stay independent of."""
    deps = dict(bundle.param_deps)
    for m, t in store.bindings.items():
        for p in term_params(t):
            forbidden = deps.get(p)
            if forbidden is not None and m in forbidden:
                return None
    goals = tuple((n, Goal(store.apply_sequent(g.sequent))) for n, g in bundle.goals)
    return {"goals": goals, "store": store}


def _split_goal(
    bundle: GoalBundle,
    name: str,
    subsequents: list[Sequent],
    new_deps: tuple[tuple[Param, frozenset[Meta]], ...] = (),
    bump_reuse: tuple[Formula, ...] = (),
) -> tuple[GoalBundle, tuple[str, ...]]:
    """Replace ``name`` by fresh-named subgoals in place.

    Subgoals inherit the parent's quantifier-reuse counts; ``bump_reuse``
    increments the count for the formulas a contraction step kept around.
    """
    sub_names = tuple(f"g{bundle.next_id + k}" for k in range(len(subsequents)))
    items: list[tuple[str, Goal]] = []
    for n, g in bundle.goals:
        if n == name:
            items.extend((sn, Goal(sq)) for sn, sq in zip(sub_names, subsequents))
        else:
            items.append((n, g))
    reuse: list[tuple[str, Formula, int]] = []
    for n, f, c in bundle.reuse:
        if n == name:
            reuse.extend((sn, f, c) for sn in sub_names)
        else:
            reuse.append((n, f, c))
    for f in bump_reuse:
        for sn in sub_names:
            hit = False
            for k, (n2, f2, c2) in enumerate(reuse):
                if n2 == sn and f2 == f:
                    reuse[k] = (n2, f2, c2 + 1)
                    hit = True
                    break
            if not hit:
                reuse.append((sn, f, 1))
    shell = GoalBundle(
        goals=tuple(items),
        store=bundle.store,
        param_deps=bundle.param_deps + new_deps,
        reuse=tuple(reuse),
        next_id=bundle.next_id + len(subsequents),
        session=bundle.session,
    )
    return shell, sub_names


# ---------------------------------------------------------------------------
# steps and forward replay


@dataclass(frozen=True)
class Step:
    """One recorded backward inference, replayable through the kernel."""

    kind: str
    goal: str
    goal_sequent: Sequent  # as displayed when the step fired
    subgoals: tuple[str, ...]
    siblings: tuple[str, ...]
    data: tuple


def _perm_moving(n: int, src: int, dst: int) -> tuple[int, ...]:
    order = list(range(n))
    order.remove(src)
    order.insert(dst, src)
    return tuple(order)


def _replay_step(step: Step, thms: dict[str, Theorem], store: Substitution, fuel: int) -> dict[str, Theorem]:
    try:
        subs = [thms[n] for n in step.subgoals]
    except KeyError as e:
        raise ReplayError(f"missing theorem for subgoal {e.args[0]!r}") from None
    goal_seq = store.apply_sequent(step.goal_sequent)
    left, right = step.goal_sequent.left, step.goal_sequent.right
    k = step.data[0] if step.data else None

    if step.kind == "basic":
        i, j = step.data
        t = kernel.basic(left[:i] + left[i + 1 :], left[i], right[:j] + right[j + 1 :])
        t = kernel.instantiate_thm(t, store)
        t = kernel.exchange_l(t, _perm_moving(len(left), len(left) - 1, i))
        t = kernel.exchange_r(t, _perm_moving(len(right), 0, j))
    elif step.kind == "conj_r":
        t = kernel.conj_r(subs[0], subs[1], pos=k)
    elif step.kind == "conj_l":
        t = kernel.conj_l(subs[0], pos=k)
    elif step.kind == "disj_r":
        t = kernel.disj_r(subs[0], pos=k)
    elif step.kind == "disj_l":
        t = kernel.disj_l(subs[0], subs[1], pos=k)
    elif step.kind == "imp_r":
        t = kernel.imp_r(subs[0], apos=len(left), bpos=k)
    elif step.kind == "imp_l":
        t = kernel.imp_l(subs[0], subs[1], apos=0, bpos=k)
    elif step.kind == "neg_r":
        t = kernel.neg_r(subs[0], apos=len(left), cpos=k)
    elif step.kind == "neg_l":
        t = kernel.neg_l(subs[0], apos=0, cpos=k)
    elif step.kind == "iff_r":
        t = kernel.iff_r(subs[0], subs[1], pos=k)
    elif step.kind == "iff_l":
        t = kernel.iff_l(subs[0], pos=k)
    elif step.kind == "all_r":
        _, p, var = step.data
        t = kernel.all_r(subs[0], p, pos=k, var=var)
    elif step.kind == "ex_l":
        _, p, var = step.data
        t = kernel.ex_l(subs[0], p, pos=k, var=var)
    elif step.kind == "all_l":
        _, m = step.data
        t = kernel.all_l(subs[0], store.apply_term(m), inst_pos=0, quant_pos=k + 1)
    elif step.kind == "ex_r":
        _, m = step.data
        t = kernel.ex_r(subs[0], store.apply_term(m), inst_pos=0, quant_pos=k + 1)
    else:
        raise ReplayError(f"unknown step kind {step.kind!r}")

    if t.sequent != goal_seq:
        raise ReplayError(
            f"replay of {step.kind} rebuilt '{print_sequent(t.sequent)}', "
            f"expected '{print_sequent(goal_seq)}'"
        )
    out = {}
    for n in step.siblings:
        if n not in thms:
            raise ReplayError(f"missing theorem for sibling goal {n!r}")
        out[n] = thms[n]
    out[step.goal] = t
    return out


def build_validation(steps: tuple[Step, ...], store: Substitution) -> RuleObject:
    """Compile recorded steps into one rule object.

    ``validate`` rebuilds theorems of the original goals from theorems of the
    final subgoals; internally each step is its own method and the chain runs
    through the self reference, so a long proof really is one object
    performing many primitive inferences in a single call.
    """
    n = len(steps)
    methods: dict[str, kernel.RuleMethod] = {}

    def method_for(i: int) -> kernel.RuleMethod:
        def run(self_ref, args: SimulTheorem, fuel: int) -> SimulTheorem:
            below = self_ref.call(f"step{i + 1}", args) if i + 1 < n else args
            out = _replay_step(steps[i], dict(below.components), store, fuel)
            return simul_pack(out)

        return run

    for i in range(n):
        methods[f"step{i}"] = method_for(i)

    if n == 0:
        methods["validate"] = lambda self_ref, args, fuel: args
    else:
        methods["validate"] = methods["step0"]
    return kernel.make_rule_object("validation", methods)


def _unit_args() -> SimulTheorem:
    return simul_pack({"__unit__": kernel.basic((), Pred("unit", ()), ())})


def replay(steps: tuple[Step, ...], store: Substitution, fuel: Fuel | int = DEFAULT_FUEL) -> dict[str, Theorem]:
    """Run the composed validation; returns theorems keyed by original goal."""
    robj = build_validation(steps, store)
    args = _unit_args()
    result = kernel.apply_rule_object(robj, "validate", args, fuel)
    return {n: t for n, t in result.components.items() if n != "__unit__"}


# ---------------------------------------------------------------------------
# tactic objects


@dataclass(frozen=True)
class TacticOutcome:
    bundle: GoalBundle
    steps: tuple[Step, ...]

    @property
    def subgoals(self) -> GoalBundle:
        return self.bundle

    @property
    def validation(self) -> tuple[RuleObject, str]:
        return build_validation(self.steps, self.bundle.store), "validate"


TacticMethod = Callable[["TacticSelf", GoalBundle], Iterator[TacticOutcome]]


class TacticObject:
    """Immutable object whose methods map bundles to outcome sequences."""

    __slots__ = ("name", "methods", "retarget")

    def __init__(
        self,
        name: str,
        methods: Mapping[str, TacticMethod],
        retarget: Callable[[str], "TacticObject"] | None = None,
    ) -> None:
        if not methods:
            raise TacticError("a tactic object needs at least one method")
        self.name = name
        self.methods = dict(methods)
        self.retarget = retarget

    def __repr__(self) -> str:
        return f"TacticObject({self.name!r})"


class TacticSelf:
    """Self-reference for tactic methods (open recursion)."""

    __slots__ = ("_obj",)

    def __init__(self, obj: TacticObject) -> None:
        self._obj = obj

    def call(self, method: str, bundle: GoalBundle) -> Iterator[TacticOutcome]:
        fn = self._obj.methods.get(method)
        if fn is None:
            raise TacticError(f"tactic {self._obj.name!r} has no method {method!r}")
        return fn(self, bundle)


def run_tactic(t: TacticObject, bundle: GoalBundle, method: str = "run") -> Iterator[TacticOutcome]:
    return TacticSelf(t).call(method, bundle)


def _single_method(name: str, fn: Callable[[GoalBundle], Iterator[TacticOutcome]],
                   retarget=None) -> TacticObject:
    return TacticObject(name, {"run": lambda self_ref, b: fn(b)}, retarget)


# ---------------------------------------------------------------------------
# primitive tactics

_LEFT_RULES = {"conj_l", "disj_l", "imp_l", "neg_l", "iff_l", "all_l", "ex_l"}
_RIGHT_RULES = {"conj_r", "disj_r", "imp_r", "neg_r", "iff_r", "all_r", "ex_r"}
RULE_NAMES = tuple(sorted(_LEFT_RULES | _RIGHT_RULES))


def _principal_matches(rule: str, f: Formula) -> bool:
    match rule:
        case "conj_l" | "conj_r":
            return isinstance(f, Conn) and f.op == AND
        case "disj_l" | "disj_r":
            return isinstance(f, Conn) and f.op == OR
        case "imp_l" | "imp_r":
            return isinstance(f, Conn) and f.op == IMP
        case "neg_l" | "neg_r":
            return isinstance(f, Conn) and f.op == NOT
        case "iff_l" | "iff_r":
            return isinstance(f, Conn) and f.op == IFF
        case "all_l" | "all_r":
            return isinstance(f, Quant) and f.q == ALL
        case "ex_l" | "ex_r":
            return isinstance(f, Quant) and f.q == EX
    return False


def _resolve_goal(bundle: GoalBundle, goal: str | None) -> tuple[str, Sequent] | None:
    name = goal if goal is not None else bundle.first_goal()
    if name is None:
        return None
    for n, g in bundle.goals:
        if n == name:
            return n, g.sequent
    return None


def _rule_outcomes(bundle: GoalBundle, rule: str, goal: str | None, pos: int | None) -> Iterator[TacticOutcome]:
    resolved = _resolve_goal(bundle, goal)
    if resolved is None:
        return
    name, seq = resolved
    side = seq.left if rule in _LEFT_RULES else seq.right
    positions = [k for k, f in enumerate(side) if _principal_matches(rule, f)]
    if pos is not None:
        positions = [k for k in positions if k == pos]
    for k in positions:
        f = side[k]
        out = _one_rule_outcome(bundle, rule, name, seq, k, f)
        if out is not None:
            yield out


def _one_rule_outcome(
    bundle: GoalBundle, rule: str, name: str, seq: Sequent, k: int, f: Formula
) -> TacticOutcome | None:
    left, right = seq.left, seq.right
    new_deps: tuple[tuple[Param, frozenset[Meta]], ...] = ()
    data: tuple = (k,)
    bump: tuple[Formula, ...] = ()

    if rule == "conj_r":
        a, b = f.args
        subs = [Sequent(left, right[:k] + (a,) + right[k + 1 :]), Sequent(left, right[:k] + (b,) + right[k + 1 :])]
    elif rule == "conj_l":
        a, b = f.args
        subs = [Sequent(left[:k] + (a, b) + left[k + 1 :], right)]
    elif rule == "disj_r":
        a, b = f.args
        subs = [Sequent(left, right[:k] + (a, b) + right[k + 1 :])]
    elif rule == "disj_l":
        a, b = f.args
        subs = [Sequent(left[:k] + (a,) + left[k + 1 :], right), Sequent(left[:k] + (b,) + left[k + 1 :], right)]
    elif rule == "imp_r":
        a, b = f.args
        subs = [Sequent(left + (a,), right[:k] + (b,) + right[k + 1 :])]
    elif rule == "imp_l":
        a, b = f.args
        subs = [
            Sequent(left[:k] + left[k + 1 :], (a,) + right),
            Sequent(left[:k] + (b,) + left[k + 1 :], right),
        ]
    elif rule == "neg_r":
        subs = [Sequent(left + (f.args[0],), right[:k] + right[k + 1 :])]
    elif rule == "neg_l":
        subs = [Sequent(left[:k] + left[k + 1 :], (f.args[0],) + right)]
    elif rule == "iff_r":
        a, b = f.args
        subs = [
            Sequent(left, right[:k] + (Conn(IMP, (a, b)),) + right[k + 1 :]),
            Sequent(left, right[:k] + (Conn(IMP, (b, a)),) + right[k + 1 :]),
        ]
    elif rule == "iff_l":
        a, b = f.args
        subs = [Sequent(left[:k] + (Conn(IMP, (a, b)), Conn(IMP, (b, a))) + left[k + 1 :], right)]
    elif rule == "all_r" or rule == "ex_l":
        p = bundle.session.fresh_param()
        new_deps = ((p, frozenset(bundle.live_metas())),)
        inst = instantiate_quant(f, p)
        if rule == "all_r":
            subs = [Sequent(left, right[:k] + (inst,) + right[k + 1 :])]
        else:
            subs = [Sequent(left[:k] + (inst,) + left[k + 1 :], right)]
        data = (k, p, f.var)
    elif rule == "all_l" or rule == "ex_r":
        if bundle.reuse_count(name, f) >= REUSE_CAP:
            return None
        m = bundle.session.fresh_meta()
        inst = instantiate_quant(f, m)
        if rule == "all_l":
            subs = [Sequent((inst,) + left, right)]
        else:
            subs = [Sequent(left, (inst,) + right)]
        data = (k, m)
        bump = (f,)
    else:
        raise TacticError(f"unknown rule {rule!r}")

    nb, sub_names = _split_goal(bundle, name, subs, new_deps=new_deps, bump_reuse=bump)
    siblings = tuple(n for n in bundle.names() if n != name)
    step = Step(rule, name, seq, sub_names, siblings, data)
    return TacticOutcome(nb, (step,))


def rule_tac(rule_id: str, goal: str | None = None, pos: int | None = None) -> TacticObject:
    """Backward application of one kernel rule to one goal."""
    if rule_id not in RULE_NAMES:
        raise TacticError(f"unknown rule {rule_id!r}")
    return _single_method(
        f"rule:{rule_id}",
        lambda b: _rule_outcomes(b, rule_id, goal, pos),
        retarget=lambda n: rule_tac(rule_id, n, pos),
    )


def basic_tac(goal: str | None = None) -> TacticObject:
    """Close a goal by unifying a left formula with a right formula.

    The unifier lands in the shared store, so sibling goals see it at once.
    Every unifiable (left, right) pair is offered as a separate outcome.
    """

    def outcomes(bundle: GoalBundle) -> Iterator[TacticOutcome]:
        resolved = _resolve_goal(bundle, goal)
        if resolved is None:
            return
        name, seq = resolved
        for i, lf in enumerate(seq.left):
            for j, rf in enumerate(seq.right):
                u = unify_formulas(lf, rf, bundle.store)
                if u is None:
                    continue
                items = tuple((n, g) for n, g in bundle.goals if n != name)
                shell = GoalBundle(
                    goals=items,
                    store=bundle.store,
                    param_deps=bundle.param_deps,
                    reuse=tuple(r for r in bundle.reuse if r[0] != name),
                    next_id=bundle.next_id,
                    session=bundle.session,
                )
                merged = _merge_store(shell, u)
                if merged is None:
                    continue
                nb = replace(shell, **merged)
                siblings = tuple(n for n in bundle.names() if n != name)
                step = Step("basic", name, seq, (), siblings, (i, j))
                yield TacticOutcome(nb, (step,))

    return _single_method("basic", outcomes, retarget=lambda n: basic_tac(n))


def all_r_tac(goal: str | None = None, pos: int | None = None) -> TacticObject:
    return rule_tac("all_r", goal, pos)


def all_l_tac(goal: str | None = None, pos: int | None = None) -> TacticObject:
    return rule_tac("all_l", goal, pos)


def ex_r_tac(goal: str | None = None, pos: int | None = None) -> TacticObject:
    return rule_tac("ex_r", goal, pos)


def ex_l_tac(goal: str | None = None, pos: int | None = None) -> TacticObject:
    return rule_tac("ex_l", goal, pos)


# ---------------------------------------------------------------------------
# tacticals


def _compose_retarget(name, ts, make):
    if all(t.retarget is not None for t in ts):
        return lambda n: make(*(t.retarget(n) for t in ts))
    return None


def then(t1: TacticObject, t2: TacticObject) -> TacticObject:
    """Apply t2 to every bundle t1 produces, preserving backtracking order."""

    def outcomes(b: GoalBundle) -> Iterator[TacticOutcome]:
        for o1 in run_tactic(t1, b):
            for o2 in run_tactic(t2, o1.bundle):
                yield TacticOutcome(o2.bundle, o1.steps + o2.steps)

    return _single_method(f"({t1.name} THEN {t2.name})", outcomes, _compose_retarget("then", (t1, t2), then))


def orelse(t1: TacticObject, t2: TacticObject) -> TacticObject:
    """t1's outcomes, or t2's exactly when t1 yields none."""

    def outcomes(b: GoalBundle) -> Iterator[TacticOutcome]:
        produced = False
        for o in run_tactic(t1, b):
            produced = True
            yield o
        if not produced:
            yield from run_tactic(t2, b)

    return _single_method(f"({t1.name} ORELSE {t2.name})", outcomes, _compose_retarget("orelse", (t1, t2), orelse))


id_tac = _single_method("ID", lambda b: iter([TacticOutcome(b, ())]))
id_tac.retarget = lambda n: id_tac

fail_tac = _single_method("FAIL", lambda b: iter(()))
fail_tac.retarget = lambda n: fail_tac


def try_(t: TacticObject) -> TacticObject:
    return orelse(t, id_tac)


def repeat(t: TacticObject, fuel: int = 1000) -> TacticObject:
    """Apply ``t`` until it fails or stops making progress."""

    def outcomes(b: GoalBundle) -> Iterator[TacticOutcome]:
        def go(bundle: GoalBundle, steps: tuple[Step, ...], budget: int) -> Iterator[TacticOutcome]:
            if budget <= 0:
                raise TacticFuelError(f"REPEAT exceeded {fuel} iterations")
            progressed = False
            for o in run_tactic(t, bundle):
                progressed = True
                if o.bundle == bundle:
                    yield TacticOutcome(o.bundle, steps + o.steps)
                else:
                    yield from go(o.bundle, steps + o.steps, budget - 1)
            if not progressed:
                yield TacticOutcome(bundle, steps)

        return go(b, (), fuel)

    rt = (lambda n: repeat(t.retarget(n), fuel)) if t.retarget else None
    return _single_method(f"REPEAT {t.name}", outcomes, rt)


def all_goals(t: TacticObject) -> TacticObject:
    """Apply ``t`` once per goal present on entry (retargeted when possible)."""

    def outcomes(b: GoalBundle) -> Iterator[TacticOutcome]:
        names = list(b.names())

        def go(i: int, bundle: GoalBundle, steps: tuple[Step, ...]) -> Iterator[TacticOutcome]:
            if i == len(names):
                yield TacticOutcome(bundle, steps)
                return
            name = names[i]
            if name not in bundle:
                yield from go(i + 1, bundle, steps)
                return
            ti = t.retarget(name) if t.retarget else t
            for o in run_tactic(ti, bundle):
                yield from go(i + 1, o.bundle, steps + o.steps)

        return go(0, b, ())

    return _single_method(f"ALLGOALS {t.name}", outcomes)


# ---------------------------------------------------------------------------
# automatic depth-first prover

# invertible rules, cheapest first: no information is lost applying them
_SAFE_ORDER = (
    "conj_l",
    "disj_r",
    "imp_r",
    "neg_l",
    "neg_r",
    "all_r",
    "ex_l",
    "conj_r",
    "disj_l",
    "imp_l",
    "iff_r",
    "iff_l",
)
_UNSAFE = ("all_l", "ex_r")


def _first_safe(seq: Sequent) -> tuple[str, int] | None:
    for rule in _SAFE_ORDER:
        side = seq.left if rule in _LEFT_RULES else seq.right
        for k, f in enumerate(side):
            if _principal_matches(rule, f):
                return rule, k
    return None


def depth_tac(max_depth: int) -> TacticObject:
    """Depth-first search: close, else invertible rules, else quantifier
    instantiation; ``max_depth`` bounds the instantiation steps per branch."""

    def outcomes(b: GoalBundle) -> Iterator[TacticOutcome]:
        def search(bundle: GoalBundle, budget: int) -> Iterator[tuple[GoalBundle, tuple[Step, ...]]]:
            name = bundle.first_goal()
            if name is None:
                yield bundle, ()
                return
            # a closure that binds nothing constrains nothing: commit to it
            # instead of treating every equivalent closure as a backtrack point
            for o in run_tactic(basic_tac(name), bundle):
                if o.bundle.store == bundle.store:
                    for fb, fs in search(o.bundle, budget):
                        yield fb, o.steps + fs
                    return
            for o in run_tactic(basic_tac(name), bundle):
                if o.bundle.store == bundle.store:
                    continue
                for fb, fs in search(o.bundle, budget):
                    yield fb, o.steps + fs
            seq = bundle.mapping[name].sequent
            safe = _first_safe(seq)
            if safe is not None:
                rule, k = safe
                for o in run_tactic(rule_tac(rule, name, k), bundle):
                    for fb, fs in search(o.bundle, budget):
                        yield fb, o.steps + fs
                return
            if budget <= 0:
                return
            for rule in _UNSAFE:
                side = seq.left if rule == "all_l" else seq.right
                for k, f in enumerate(side):
                    if not _principal_matches(rule, f):
                        continue
                    for o in run_tactic(rule_tac(rule, name, k), bundle):
                        for fb, fs in search(o.bundle, budget - 1):
                            yield fb, o.steps + fs

        return (TacticOutcome(fb, fs) for fb, fs in search(b, max_depth))

    return _single_method(f"DEPTH {max_depth}", outcomes)


# ---------------------------------------------------------------------------
# whole proofs


def prove(
    goal: Sequent | str,
    tactic: TacticObject,
    fuel: Fuel | int = DEFAULT_FUEL,
    session: Session | None = None,
) -> Theorem:
    """Run ``tactic`` backward from ``goal``; replay its validation forward.

    The returned theorem's sequent is the goal with the final store applied
    and must contain no leftover metavariables.
    """
    session = session if session is not None else Session()
    if isinstance(goal, str):
        goal = parse_sequent(goal, session)
    bundle = new_bundle(goal, session)
    residual: ResidualMetaError | None = None
    for outcome in run_tactic(tactic, bundle):
        if not outcome.bundle.discharged():
            continue
        store = outcome.bundle.store
        thms = replay(outcome.steps, store, fuel)
        thm = thms.get("g1")
        if thm is None:
            raise ReplayError("replay did not produce a theorem for the main goal")
        expected = store.apply_sequent(goal)
        if thm.sequent != expected:
            raise ReplayError(
                f"proved '{print_sequent(thm.sequent)}' but the goal was '{print_sequent(expected)}'"
            )
        if sequent_metas(thm.sequent):
            # a later outcome may instantiate more; keep looking
            residual = ResidualMetaError(f"residual metavariables in: {print_sequent(thm.sequent)}")
            continue
        return thm
    if residual is not None:
        raise residual
    raise TacticFailed(f"tactic produced no complete proof of '{print_sequent(goal)}'")


# ---------------------------------------------------------------------------
# interactive proof state


@dataclass(frozen=True)
class ProofState:
    """One interactive session: current bundle plus history for undo."""

    main_goal: Sequent
    bundles: tuple[GoalBundle, ...]
    steps: tuple[tuple[Step, ...], ...]  # one group per applied tactic

    @property
    def bundle(self) -> GoalBundle:
        return self.bundles[-1]

    @property
    def pending_validations(self) -> list[tuple[RuleObject, str]]:
        store = self.bundle.store
        return [(build_validation(group, store), "validate") for group in self.steps]

    def all_steps(self) -> tuple[Step, ...]:
        return tuple(s for group in self.steps for s in group)


def new_proof(goal: Sequent | str, session: Session | None = None) -> ProofState:
    session = session if session is not None else Session()
    if isinstance(goal, str):
        goal = parse_sequent(goal, session)
    return ProofState(goal, (new_bundle(goal, session),), ())


def proof_state_apply(ps: ProofState, t: TacticObject) -> ProofState:
    """Take the first outcome of ``t`` on the current bundle; push history."""
    for outcome in run_tactic(t, ps.bundle):
        return ProofState(ps.main_goal, ps.bundles + (outcome.bundle,), ps.steps + (outcome.steps,))
    raise TacticFailed(f"tactic {t.name} yielded no outcomes")


def proof_state_undo(ps: ProofState) -> ProofState:
    if len(ps.bundles) == 1:
        raise UndoAtRootError("nothing to undo")
    return ProofState(ps.main_goal, ps.bundles[:-1], ps.steps[:-1])


def qed(ps: ProofState, fuel: Fuel | int = DEFAULT_FUEL) -> Theorem:
    """Replay all recorded validations; requires every goal discharged."""
    if not ps.bundle.discharged():
        open_names = ", ".join(ps.bundle.names())
        raise TacticFailed(f"goals still open: {open_names}")
    store = ps.bundle.store
    thms = replay(ps.all_steps(), store, fuel)
    thm = thms.get("g1")
    if thm is None:
        raise ReplayError("replay did not produce a theorem for the main goal")
    expected = store.apply_sequent(ps.main_goal)
    if thm.sequent != expected:
        raise ReplayError(
            f"proved '{print_sequent(thm.sequent)}' but the goal was '{print_sequent(expected)}'"
        )
    if sequent_metas(thm.sequent):
        raise ResidualMetaError(f"residual metavariables in: {print_sequent(thm.sequent)}")
    return thm


# ---------------------------------------------------------------------------
# tactic expression language (shared by the CLI and the server)

_KEYWORDS = {"THEN", "ORELSE", "REPEAT", "TRY", "DEPTH", "ID", "FAIL", "basic", "rule"}
_PRIM_RULES = {"all_r", "all_l", "ex_r", "ex_l"}


def _tac_tokens(text: str) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            out.append(c)
            i += 1
        elif c.isalnum() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(text[i:j])
            i = j
        else:
            raise ParseError(f"bad character {c!r} in tactic expression", i)
    return out


class _TacParser:
    def __init__(self, text: str):
        self.tokens = _tac_tokens(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of tactic expression", self.i)
        self.i += 1
        return tok

    def opt_goal(self) -> str | None:
        tok = self.peek()
        if tok is not None and tok not in _KEYWORDS and tok not in ("(", ")") and not tok.isdigit():
            if tok in _PRIM_RULES or tok in RULE_NAMES:
                return None
            self.i += 1
            return tok
        return None

    def expr(self) -> TacticObject:
        t = self.then_chain()
        if self.peek() == "ORELSE":
            self.next()
            return orelse(t, self.expr())
        return t

    def then_chain(self) -> TacticObject:
        t = self.prim()
        if self.peek() == "THEN":
            self.next()
            return then(t, self.then_chain())
        return t

    def prim(self) -> TacticObject:
        tok = self.next()
        if tok == "(":
            t = self.expr()
            if self.next() != ")":
                raise ParseError("expected ')' in tactic expression", self.i)
            return t
        if tok == "basic":
            return basic_tac(self.opt_goal())
        if tok == "rule":
            rule_id = self.next()
            if rule_id not in RULE_NAMES:
                raise ParseError(f"unknown rule {rule_id!r}", self.i)
            return rule_tac(rule_id, self.opt_goal())
        if tok in _PRIM_RULES:
            return rule_tac(tok, self.opt_goal())
        if tok == "REPEAT":
            return repeat(self.prim())
        if tok == "TRY":
            return try_(self.prim())
        if tok == "DEPTH":
            d = self.next()
            if not d.isdigit():
                raise ParseError(f"DEPTH needs a number, got {d!r}", self.i)
            return depth_tac(int(d))
        if tok == "ID":
            return id_tac
        if tok == "FAIL":
            return fail_tac
        raise ParseError(f"unexpected token {tok!r} in tactic expression", self.i)

    def done(self) -> None:
        if self.peek() is not None:
            raise ParseError(f"trailing input {self.peek()!r} in tactic expression", self.i)


def parse_tactic(text: str) -> TacticObject:
    """Parse ``basic | rule <name> [<goal>] | all_r ... | THEN | ORELSE |
    REPEAT | TRY | DEPTH <n> | ID | FAIL`` with THEN binding tighter."""
    p = _TacParser(text)
    t = p.expr()
    p.done()
    return t


# primitive palette advertised to UIs; dry-run applicability
PRIMITIVE_TACTICS = ("basic",) + RULE_NAMES


def applicable_tactics(bundle: GoalBundle, goal: str | None = None) -> list[str]:
    """Names of primitive tactics with at least one outcome (by dry run).

    Runs against a cloned session so probing never burns fresh serials.
    """
    probe = replace(bundle, session=bundle.session.clone())
    out = []
    for tac_name in PRIMITIVE_TACTICS:
        t = basic_tac(goal) if tac_name == "basic" else rule_tac(tac_name, goal)
        if next(iter(run_tactic(t, probe)), None) is not None:
            out.append(tac_name)
    return out
