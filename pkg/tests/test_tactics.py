"""Backward proof machinery: tactics, tacticals, search, replay, undo."""

from __future__ import annotations

import random

import pytest

from ootp.logic import ParseError, Session, Substitution, parse_sequent, print_sequent
from ootp.tactics import (
    Goal,
    GoalBundle,
    ReplayError,
    TacticFailed,
    TacticFuelError,
    UndoAtRootError,
    all_goals,
    applicable_tactics,
    basic_tac,
    depth_tac,
    fail_tac,
    id_tac,
    new_proof,
    orelse,
    parse_tactic,
    proof_state_apply,
    proof_state_undo,
    prove,
    qed,
    repeat,
    replay,
    rule_tac,
    run_tactic,
    then,
    try_,
)

import oracles


def bundle_of(*sequents: str, session: Session | None = None) -> GoalBundle:
    session = session if session is not None else Session()
    goals = tuple(
        (f"g{i + 1}", Goal(parse_sequent(text, session))) for i, text in enumerate(sequents)
    )
    return GoalBundle(
        goals=goals,
        store=Substitution.empty(),
        param_deps=(),
        reuse=(),
        next_id=len(sequents) + 1,
        session=session,
    )


def outcomes(t, b):
    return list(run_tactic(t, b))


def goal_texts(b: GoalBundle) -> list[str]:
    return [print_sequent(g.sequent) for _, g in b.goals]


# ---------------------------------------------------------------------------
# primitive tactics


def test_conj_r_backward():
    outs = outcomes(rule_tac("conj_r"), bundle_of("|- P & Q"))
    assert len(outs) == 1
    assert goal_texts(outs[0].bundle) == ["|- P", "|- Q"]


def test_imp_r_backward():
    outs = outcomes(rule_tac("imp_r"), bundle_of("|- P --> Q"))
    assert goal_texts(outs[0].bundle) == ["P |- Q"]


def test_conj_r_inapplicable():
    assert outcomes(rule_tac("conj_r"), bundle_of("|- P | Q")) == []


def test_rule_tac_targets_named_goal():
    b = bundle_of("|- P & Q", "|- R & S")
    outs = outcomes(rule_tac("conj_r", "g2"), b)
    assert goal_texts(outs[0].bundle) == ["|- P & Q", "|- R", "|- S"]


def test_basic_closes_reflexive_goal():
    outs = outcomes(basic_tac(), bundle_of("P |- P"))
    assert len(outs) == 1
    assert outs[0].bundle.discharged()
    assert not outs[0].bundle.store


def test_basic_fails_on_mismatch():
    assert outcomes(basic_tac(), bundle_of("P |- Q")) == []


def test_basic_binds_shared_meta_across_siblings():
    s = Session()
    b = bundle_of("P(?x) |- P(c)", "|- Q(?x)", session=s)
    outs = outcomes(basic_tac("g1"), b)
    assert len(outs) == 1
    nb = outs[0].bundle
    assert goal_texts(nb) == ["|- Q(c)"]
    assert nb.store.apply_term(s.metas["x"]).fn == "c"


def test_basic_yields_alternative_unifiers_in_order():
    b = bundle_of("P(a), P(?x) |- P(?y)")
    outs = outcomes(basic_tac(), b)
    # (left0, right0) then (left1, right0)
    assert len(outs) == 2
    assert outs[0].steps[0].data == (0, 0)
    assert outs[1].steps[0].data == (1, 0)


def test_all_r_tac_introduces_fresh_param():
    outs = outcomes(rule_tac("all_r"), bundle_of("|- ALL x. P(x)"))
    assert goal_texts(outs[0].bundle) == ["|- P(p1)"]


def test_all_l_tac_keeps_formula_and_adds_meta_instance():
    outs = outcomes(rule_tac("all_l"), bundle_of("ALL x. P(x) |- P(a)"))
    assert goal_texts(outs[0].bundle) == ["P(?m1), ALL x. P(x) |- P(a)"]
    closed = outcomes(basic_tac(), outs[0].bundle)
    assert closed and closed[0].bundle.discharged()
    (m,) = [m for m in outs[0].bundle.session.metas.values() if m.name == "m1"]
    assert closed[0].bundle.store.apply_term(m).fn == "a"


def test_all_l_reuse_cap():
    b = bundle_of("ALL x. P(x) |- Q")
    t = rule_tac("all_l")
    for _ in range(3):
        outs = outcomes(t, b)
        assert outs
        b = outs[0].bundle
    assert outcomes(t, b) == []  # default cap of 3 reached


def test_param_dependency_blocks_unsound_unifier():
    # |- P(?x) --> ALL y. P(y): close would need ?x := p for a later param p
    b = bundle_of("P(?m) |- ALL y. P(y)")
    outs = outcomes(rule_tac("all_r"), b)
    assert len(outs) == 1
    assert outcomes(basic_tac(), outs[0].bundle) == []


# ---------------------------------------------------------------------------
# tacticals


def test_orelse_fail_left_identity():
    b = bundle_of("|- P & Q")
    t = rule_tac("conj_r")
    assert [o.bundle for o in outcomes(orelse(fail_tac, t), b)] == [o.bundle for o in outcomes(t, b)]


def test_orelse_takes_first_branch_when_nonempty():
    b = bundle_of("|- P & Q")
    outs = outcomes(orelse(rule_tac("conj_r"), id_tac), b)
    assert goal_texts(outs[0].bundle) == ["|- P", "|- Q"]


def test_then_identity_laws():
    b = bundle_of("|- P & Q")
    t = rule_tac("conj_r")
    lhs = [o.bundle for o in outcomes(then(id_tac, t), b)]
    rhs = [o.bundle for o in outcomes(t, b)]
    assert lhs == rhs
    lhs2 = [o.bundle for o in outcomes(then(t, id_tac), b)]
    assert lhs2 == rhs


def test_then_sequences_with_backtracking_order():
    b = bundle_of("P(a), P(b) |- P(?y), Q")
    t = then(basic_tac(), id_tac)
    outs = outcomes(t, b)
    assert [o.steps[0].data for o in outs] == [(0, 0), (1, 0)]


def test_try_never_fails():
    b = bundle_of("|- P")
    assert [o.bundle for o in outcomes(try_(fail_tac), b)] == [b]


def test_repeat_decomposes_nested_conjunctions():
    b = bundle_of("|- (A & B) & (C & D)")
    outs = outcomes(repeat(rule_tac("conj_r")), b)
    assert goal_texts(outs[0].bundle) == ["|- A", "|- B", "|- C", "|- D"]


def test_repeat_of_id_terminates():
    b = bundle_of("|- P")
    outs = outcomes(repeat(id_tac), b)
    assert [o.bundle for o in outs] == [b]


def test_repeat_fuel_exhaustion_raises():
    b = bundle_of("ALL x. P(x) |- Q")

    class AlwaysProgress:
        pass

    with pytest.raises(TacticFuelError):
        list(run_tactic(repeat(rule_tac("all_l"), fuel=2), b))


def test_all_goals_maps_over_every_goal():
    b = bundle_of("|- P & Q", "|- R & S")
    outs = outcomes(all_goals(rule_tac("conj_r")), b)
    assert goal_texts(outs[0].bundle) == ["|- P", "|- Q", "|- R", "|- S"]


# ---------------------------------------------------------------------------
# search


def test_depth_proves_conj_swap():
    thm = prove("|- P & Q --> Q & P", depth_tac(5))
    assert print_sequent(thm.sequent) == "|- P & Q --> Q & P"


def test_depth_proves_forall_instance():
    thm = prove("|- (ALL x. P(x)) --> P(a)", depth_tac(5))
    assert print_sequent(thm.sequent) == "|- (ALL x. P(x)) --> P(a)"


def test_depth_rejects_invalid():
    b = bundle_of("|- P --> Q")
    assert outcomes(depth_tac(8), b) == []
    with pytest.raises(TacticFailed):
        prove("|- P", depth_tac(5))


def test_depth_handles_empty_right_side():
    thm = prove("P & ~P |-", depth_tac(5))
    assert print_sequent(thm.sequent) == "P & ~P |-"


# ---------------------------------------------------------------------------
# prove and replay


def test_prove_rejects_residual_metas():
    # EX x. P(x) alone cannot force a witness; proving it requires closing
    # against something, so drive a contrived tactic that leaves a meta.
    with pytest.raises(TacticFailed):
        prove("|- EX x. P(x)", depth_tac(3))


def test_prove_theorem_matches_goal_after_instantiation():
    s = Session()
    thm = prove("P(?u) |- P(c)", depth_tac(2), session=s)
    assert print_sequent(thm.sequent) == "P(c) |- P(c)"  # goal with the store applied


def test_prove_rejects_leftover_metas_even_when_closed():
    from ootp.tactics import ResidualMetaError

    with pytest.raises(ResidualMetaError):
        prove("P(?u) |- P(?u)", depth_tac(2))


def test_validation_replay_runs_through_kernel():
    b = bundle_of("|- P & Q --> Q & P")
    (outcome,) = [o for o in outcomes(depth_tac(4), b) if o.bundle.discharged()][:1]
    thms = replay(outcome.steps, outcome.bundle.store)
    assert print_sequent(thms["g1"].sequent) == "|- P & Q --> Q & P"
    robj, method = outcome.validation
    assert method == "validate"
    assert set(robj.methods) >= {"validate", "step0"}


def test_replay_detects_missing_subgoal_theorems():
    b = bundle_of("|- P & Q")
    (outcome,) = outcomes(rule_tac("conj_r"), b)
    with pytest.raises(ReplayError):
        replay(outcome.steps, outcome.bundle.store)


# ---------------------------------------------------------------------------
# proof state


def test_proof_state_apply_undo_qed():
    ps = new_proof("P & Q |- Q & P")
    ps = proof_state_apply(ps, parse_tactic("rule conj_l g1"))
    assert goal_texts(ps.bundle) == ["P, Q |- Q & P"]
    ps = proof_state_apply(ps, parse_tactic("rule conj_r g2"))
    ps2 = proof_state_undo(ps)
    assert goal_texts(ps2.bundle) == ["P, Q |- Q & P"]
    ps = proof_state_apply(ps2, parse_tactic("DEPTH 4"))
    thm = qed(ps)
    assert print_sequent(thm.sequent) == "P & Q |- Q & P"


def test_undo_at_root_errors():
    with pytest.raises(UndoAtRootError):
        proof_state_undo(new_proof("|- P"))


def test_qed_with_open_goals_errors():
    with pytest.raises(TacticFailed):
        qed(new_proof("|- P"))


def test_pending_validations_exposed_as_rule_objects():
    ps = new_proof("|- P --> P")
    ps = proof_state_apply(ps, parse_tactic("rule imp_r"))
    ps = proof_state_apply(ps, parse_tactic("basic"))
    pvs = ps.pending_validations
    assert len(pvs) == 2
    for robj, method in pvs:
        assert method == "validate"
        assert "validate" in robj.methods


# ---------------------------------------------------------------------------
# the tactic expression language


def test_parse_tactic_then_binds_tighter_than_orelse():
    t = parse_tactic("FAIL THEN ID ORELSE ID")
    # (FAIL THEN ID) ORELSE ID: on any bundle, the left branch fails
    b = bundle_of("|- P")
    assert [o.bundle for o in outcomes(t, b)] == [b]


def test_parse_tactic_parens_and_repeat():
    t = parse_tactic("REPEAT (rule conj_r) THEN TRY basic")
    b = bundle_of("|- (A & B) & (A & B)")
    outs = outcomes(t, b)
    assert outs


def test_parse_tactic_rule_with_goal():
    t = parse_tactic("rule conj_r g2")
    b = bundle_of("|- X", "|- P & Q")
    outs = outcomes(t, b)
    assert goal_texts(outs[0].bundle) == ["|- X", "|- P", "|- Q"]


def test_parse_tactic_errors():
    with pytest.raises(ParseError):
        parse_tactic("rule made_up_rule")
    with pytest.raises(ParseError):
        parse_tactic("DEPTH nope")
    with pytest.raises(ParseError):
        parse_tactic("(basic")
    with pytest.raises(ParseError):
        parse_tactic("basic extra words here")


def test_applicable_tactics_dry_run_burns_no_serials():
    s = Session()
    b = bundle_of("|- ALL x. P(x) & Q(x)", session=s)
    before = (s._meta_serial, s._param_serial)
    names = applicable_tactics(b)
    assert (s._meta_serial, s._param_serial) == before
    assert "all_r" in names and "basic" not in names


def test_tactic_object_methods_dispatch_through_self():
    from ootp.tactics import TacticObject

    def run(self_ref, b):
        return self_ref.call("close", b)

    def close(self_ref, b):
        return run_tactic(basic_tac(), b)

    t = TacticObject("closer", {"run": run, "close": close})
    outs = outcomes(t, bundle_of("P |- P"))
    assert len(outs) == 1 and outs[0].bundle.discharged()
    # overriding the sibling changes what run does, late-bound via self
    t2 = TacticObject("noop", {"run": run, "close": lambda s, b: iter([])})
    assert outcomes(t2, bundle_of("P |- P")) == []


# twenty mixed tautologies, each pre-validated by the matching oracle
TAUTOLOGY_SUITE = (
    "|- P --> P",
    "|- P | ~P",
    "|- ~~P <-> P",
    "|- P & Q --> Q & P",
    "|- P | Q --> Q | P",
    "|- (P --> Q) & (Q --> R) --> (P --> R)",
    "|- (P --> Q --> R) <-> (P & Q --> R)",
    "|- ~(P & Q) <-> ~P | ~Q",
    "|- ~(P | Q) <-> ~P & ~Q",
    "|- (P --> Q) | (Q --> P)",
    "|- ((P --> Q) --> P) --> P",
    "P & (Q | R) |- P & Q | P & R",
    "P --> Q, ~Q |- ~P",
    "|- (P <-> Q) <-> (Q <-> P)",
    "|- (ALL x. P(x)) --> P(a)",
    "|- P(a) --> (EX x. P(x))",
    "|- (ALL x. P(x) --> Q(x)) & P(b) --> Q(b)",
    "|- ~(EX x. P(x)) --> (ALL x. ~P(x))",
    "EX x. P(x) |- EX y. P(y)",
    "|- (ALL x. P(x) & Q(x)) --> (ALL x. P(x))",
)


def test_alpha_variant_closure():
    # binder names are display hints; closing across variants must replay
    thm = prove("EX x. P(x) |- EX y. P(y)", depth_tac(4))
    assert print_sequent(thm.sequent) in ("EX x. P(x) |- EX x. P(x)", "EX x. P(x) |- EX y. P(y)")
    assert thm.sequent == parse_sequent("EX q. P(q) |- EX r. P(r)")


def test_prove_twenty_problem_suite():
    assert len(TAUTOLOGY_SUITE) == 20
    for text in TAUTOLOGY_SUITE:
        seq = parse_sequent(text)
        assert oracles.sequent_valid(seq), text
        thm = prove(text, depth_tac(12))
        assert thm.sequent == seq, text


# ---------------------------------------------------------------------------
# randomized replay spot-check (volume lives in the acceptance suite)


def test_replay_on_random_provable_goals():
    rng = random.Random(7)
    atoms = ["P", "Q", "R"]
    proved = 0
    for _ in range(40):
        a, b = rng.choice(atoms), rng.choice(atoms)
        text = rng.choice(
            [
                f"|- {a} & {b} --> {b} & {a}",
                f"|- {a} --> {a} | {b}",
                f"{a} & {b} |- {a}",
                f"|- ({a} --> {b}) | ({b} --> {a})",
                f"~{a} | {b} |- {a} --> {b}",
            ]
        )
        seq = parse_sequent(text)
        assert oracles.tt_valid(seq), text
        thm = prove(seq, depth_tac(6))
        assert thm.sequent == seq
        proved += 1
    assert proved == 40
