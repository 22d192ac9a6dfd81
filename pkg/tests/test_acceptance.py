"""Acceptance suite: one test per criterion, each printing a PASS line.

Criterion 2 (kernel soundness) is the final test in the module: a
module-scoped recorder collects every theorem minted while the other
criteria run and the oracle validates all of them; the session-wide audit
in conftest.py repeats the check over the whole test run.
"""

from __future__ import annotations

import io
import itertools
import random
import time

import pytest

from ootp import kernel
from ootp.cli import run_script, run_script_text
from ootp.kernel import FuelExhausted
from ootp.logic import (
    AND,
    IMP,
    NOT,
    OR,
    App,
    Conn,
    Formula,
    Pred,
    Sequent,
    Session,
    Substitution,
    parse_sequent,
    print_sequent,
)
from ootp.simul_defs import derive_ground, parse_defs
from ootp.tactics import (
    Goal,
    GoalBundle,
    TacticFailed,
    basic_tac,
    depth_tac,
    fail_tac,
    id_tac,
    new_bundle,
    orelse,
    prove,
    replay,
    rule_tac,
    run_tactic,
    then,
)
from ootp.translate import check_equiv, interp_fun, interp_imp, interp_oo, fgh_program, translate_to_fun, translate_to_oo

import oracles


@pytest.fixture(scope="module", autouse=True)
def minted_theorems():
    record: list = []
    kernel.add_mint_observer(record.append)
    yield record
    kernel.remove_mint_observer(record.append)


def ok(criterion: str, detail: str) -> None:
    print(f"\nACCEPTANCE {criterion}: PASS - {detail}")


# ---------------------------------------------------------------------------
# criterion 1: reference program reproduction


def test_criterion_1_reference_program():
    p = fgh_program()
    oo, fn = translate_to_oo(p), translate_to_fun(p)
    for run in (
        interp_imp(p, "F", (0, 0, 0), 10000),
        interp_oo(oo, "F", (0, 0, 0), 10000),
        interp_fun(fn, "F", (0, 0, 0), 10000),
    ):
        assert run.status == "terminated" and run.final_state == (1, 1, 0)
    t0 = time.perf_counter()
    report = check_equiv(p, (-5, 5), None, 10000)
    elapsed = time.perf_counter() - t0
    assert report.runs == 11**3 * 3
    assert report.disagreements == ()
    assert elapsed < 10.0, f"bisimulation took {elapsed:.1f}s"
    ok(
        "1 (reference program)",
        f"F(0,0,0)=(1,1,0) on all three; {report.runs} grid runs, "
        f"0 disagreements in {elapsed:.2f}s [{report.backend} backend]",
    )


# ---------------------------------------------------------------------------
# criterion 3: propositional completeness (corpus shared with criterion 4)

_ATOMS = ("P", "Q", "R")


def _formulas_upto_depth1() -> list[Formula]:
    d0: list[Formula] = [Pred(a) for a in _ATOMS]
    out = list(d0)
    out.extend(Conn(NOT, (f,)) for f in d0)
    for op in (AND, OR, IMP, "<->"):
        out.extend(Conn(op, (f, g)) for f in d0 for g in d0)
    return out


def _formulas_depth2(stride: int, count: int) -> list[Formula]:
    d1 = _formulas_upto_depth1()
    stream = itertools.chain(
        (Conn(NOT, (f,)) for f in d1),
        (Conn(op, (f, g)) for op in (AND, OR, IMP, "<->") for f in d1 for g in d1),
    )
    return list(itertools.islice(itertools.islice(stream, None, None, stride), count))


def _corpus() -> list[Sequent]:
    d1 = _formulas_upto_depth1()
    d2 = _formulas_depth2(stride=17, count=400)
    d3 = [
        Conn(op, (f, g))
        for op, f, g in zip(itertools.cycle((IMP, OR, AND)), d2[260:340], itertools.cycle(d1))
    ]
    sequents: list[Sequent] = []
    sequents.extend(Sequent((), (f,)) for f in d2[:260])
    sequents.extend(Sequent((), (f,)) for f in d3)
    sequents.extend(Sequent((f,), (g,)) for f, g in zip(d2[40:240:2], d2[41:241:2]))
    sequents.extend(
        Sequent((d1[i % 42], d1[(i * 7 + 3) % 42]), (d2[340 + i],)) for i in range(60)
    )
    sequents.extend(Sequent((f,), ()) for f in d2[200:240])
    return sequents


_PROVED_OUTCOMES: list = []  # (sequent, steps) collected for criterion 4


def test_criterion_3_propositional_completeness():
    corpus = _corpus()
    assert len(corpus) >= 500
    t0 = time.perf_counter()
    valid = invalid = 0
    for seq in corpus:
        expected = oracles.tt_valid(seq)
        bundle = new_bundle(seq, Session())
        outcome = next(
            (o for o in run_tactic(depth_tac(12), bundle) if o.bundle.discharged()), None
        )
        assert (outcome is not None) == expected, print_sequent(seq)
        if outcome is not None:
            valid += 1
            _PROVED_OUTCOMES.append((seq, outcome))
        else:
            invalid += 1
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"completeness sweep took {elapsed:.1f}s"
    ok(
        "3 (propositional completeness)",
        f"{len(corpus)} sequents ({valid} valid, {invalid} invalid) "
        f"agree with the truth-table oracle in {elapsed:.1f}s",
    )


def _random_formula(rng: random.Random, depth: int) -> Formula:
    if depth == 0 or rng.random() < 0.3:
        return Pred(rng.choice(_ATOMS))
    op = rng.choice((AND, OR, IMP, "<->", NOT))
    if op == NOT:
        return Conn(NOT, (_random_formula(rng, depth - 1),))
    return Conn(op, (_random_formula(rng, depth - 1), _random_formula(rng, depth - 1)))


def _random_provable(rng: random.Random, count: int) -> list[Sequent]:
    out: list[Sequent] = []
    while len(out) < count:
        nl = rng.randint(0, 2)
        seq = Sequent(
            tuple(_random_formula(rng, rng.randint(1, 3)) for _ in range(nl)),
            (_random_formula(rng, rng.randint(1, 3)),),
        )
        if oracles.tt_valid(seq):
            out.append(seq)
    return out


def test_criterion_4_validation_replay():
    # the corpus proofs plus freshly generated random provable goals
    jobs = list(_PROVED_OUTCOMES)
    rng = random.Random(41)
    for seq in _random_provable(rng, 40):
        bundle = new_bundle(seq, Session())
        outcome = next((o for o in run_tactic(depth_tac(12), bundle) if o.bundle.discharged()), None)
        assert outcome is not None, print_sequent(seq)
        jobs.append((seq, outcome))
    applications = 0
    failures = 0
    for seq, outcome in jobs:
        store = outcome.bundle.store
        try:
            thms = replay(outcome.steps, store)  # re-checks every step exactly
        except Exception:  # noqa: BLE001 - anything here is a replay failure
            failures += 1
            continue
        if thms["g1"].sequent != store.apply_sequent(seq):
            failures += 1
        applications += len(outcome.steps)
    assert applications >= 200
    assert failures == 0
    ok(
        "4 (validation replay)",
        f"{applications} recorded tactic applications over {len(jobs)} proofs "
        f"replayed through the kernel with 0 mismatches",
    )


# ---------------------------------------------------------------------------
# criterion 5: tactical laws


def _random_bundle(rng: random.Random) -> GoalBundle:
    session = Session()
    shapes = [
        "|- {a} & {b}",
        "{a} |- {a}",
        "|- {a} --> {b}",
        "{a} & {b} |- {b} & {a}",
        "|- {a} | ~{a}",
        "{a}(?x) |- {a}(c)",
        "|- {a}(?x) --> {b}(?x)",
    ]
    k = rng.randint(1, 3)
    goals = []
    for i in range(k):
        text = rng.choice(shapes).format(a=rng.choice(_ATOMS), b=rng.choice(_ATOMS))
        goals.append((f"g{i + 1}", Goal(parse_sequent(text, session))))
    return GoalBundle(
        goals=tuple(goals),
        store=Substitution.empty(),
        param_deps=(),
        reuse=(),
        next_id=k + 1,
        session=session,
    )


def _bundles_of(t, b):
    return [o.bundle for o in run_tactic(t, b)]


def test_criterion_5_tactical_laws():
    rng = random.Random(2024)
    tactics = [
        lambda: basic_tac(),
        lambda: rule_tac("conj_r"),
        lambda: rule_tac("imp_r"),
        lambda: rule_tac("conj_l"),
        lambda: orelse(basic_tac(), rule_tac("conj_r")),
    ]
    checked = 0
    for _ in range(120):
        b = _random_bundle(rng)
        t = rng.choice(tactics)()
        a1 = rng.choice(tactics)()
        a2 = rng.choice(tactics)()
        assert _bundles_of(orelse(fail_tac, t), b) == _bundles_of(t, b)
        assert _bundles_of(orelse(t, fail_tac), b) == _bundles_of(t, b)
        assert _bundles_of(then(id_tac, t), b) == _bundles_of(t, b)
        assert _bundles_of(then(t, id_tac), b) == _bundles_of(t, b)
        assert _bundles_of(then(a1, then(a2, t)), b) == _bundles_of(then(then(a1, a2), t), b)
        checked += 1
    ok("5 (tactical laws)", f"identity and associativity laws held on {checked} random bundles")


# ---------------------------------------------------------------------------
# criterion 6: simultaneity


def test_criterion_6_simultaneity():
    session = Session()
    b = GoalBundle(
        goals=(
            ("g1", Goal(parse_sequent("P(?x) |- P(c)", session))),
            ("g2", Goal(parse_sequent("|- Q(?x)", session))),
            ("g3", Goal(parse_sequent("R(?x, ?y) |- S", session))),
        ),
        store=Substitution.empty(),
        param_deps=(),
        reuse=(),
        next_id=4,
        session=session,
    )
    (outcome,) = list(run_tactic(basic_tac("g1"), b))
    nb = outcome.bundle
    texts = {n: print_sequent(g.sequent) for n, g in nb.goals}
    assert texts == {"g2": "|- Q(c)", "g3": "R(c, ?y) |- S"}

    rng = random.Random(99)
    checked = 0
    for _ in range(60):
        session = Session()
        m = session.meta_named("x")
        const = rng.choice(("a", "b", "c"))
        goals = [("g1", Goal(parse_sequent(f"P(?x) |- P({const})", session)))]
        for i in range(rng.randint(1, 3)):
            goals.append((f"g{i + 2}", Goal(parse_sequent(f"Q{i}(?x) |- R{i}(?x)", session))))
        bundle = GoalBundle(
            goals=tuple(goals),
            store=Substitution.empty(),
            param_deps=(),
            reuse=(),
            next_id=len(goals) + 1,
            session=session,
        )
        outs = list(run_tactic(basic_tac("g1"), bundle))
        assert outs, "closing tactic must apply"
        nb = outs[0].bundle
        binding = nb.store.apply_term(m)
        assert binding == App(const, ())
        for _, g in nb.goals:
            from ootp.logic import sequent_metas

            assert m not in sequent_metas(g.sequent), "sibling still mentions the bound meta"
        checked += 1
    ok("6 (simultaneity)", f"shared-meta bindings propagated to every sibling in {checked + 1} bundles")


# ---------------------------------------------------------------------------
# criterion 7: even/odd oracle


def _num(n: int) -> App:
    t = App("0", ())
    for _ in range(n):
        t = App("s", (t,))
    return t


def test_criterion_7_simul_defs_oracle():
    g = parse_defs("group evenodd { even(0). even(s(N)) :- odd(N). odd(s(N)) :- even(N). }")[0]
    checks = 0
    for n in range(51):
        even_ok = derive_ground(g, "even", (_num(n),), 200) is not None
        odd_ok = derive_ground(g, "odd", (_num(n),), 200) is not None
        assert even_ok == (n % 2 == 0), f"even(s^{n}(0))"
        assert odd_ok == (n % 2 == 1), f"odd(s^{n}(0))"
        checks += 2
    assert checks == 102
    for n in (0, 4, 17):
        pred = "even" if n % 2 == 0 else "odd"
        assert derive_ground(g, pred, (_num(n),), n) is not None
        if n > 0:
            with pytest.raises(FuelExhausted):
                derive_ground(g, pred, (_num(n),), n - 1)
    ok("7 (simul_defs oracle)", "102 parity checks match, fuel lower bound verified at n in {0, 4, 17}")


# ---------------------------------------------------------------------------
# criterion 8: quantified suite


_TAUTOLOGIES = (
    "|- (ALL x. P(x)) --> P(a)",
    "|- P(a) --> (EX x. P(x))",
    "|- (ALL x. P(x) & Q(x)) <-> (ALL x. P(x)) & (ALL x. Q(x))",
    "|- (EX x. P(x) | Q(x)) <-> (EX x. P(x)) | (EX x. Q(x))",
    "|- (ALL x. P(x) --> Q(x)) --> ((ALL x. P(x)) --> (ALL x. Q(x)))",
    "|- ~(EX x. P(x)) <-> (ALL x. ~P(x))",
    "|- (ALL x. ALL y. R(x, y)) --> (ALL y. ALL x. R(x, y))",
    "|- (EX x. ALL y. R(x, y)) --> (ALL y. EX x. R(x, y))",
    "|- (ALL x. P(x)) --> (EX x. P(x))",
    "|- ((ALL x. P(x)) | (ALL x. Q(x))) --> (ALL x. P(x) | Q(x))",
    "P(a), ALL x. P(x) --> Q(x) |- Q(a)",
    "|- (EX x. P(x) & Q(x)) --> (EX x. P(x)) & (EX x. Q(x))",
    "|- EX x. P(x) --> (ALL y. P(y))",  # the drinker
)

_NON_THEOREMS = (
    "|- P(a) --> (ALL x. P(x))",
    "|- (EX x. P(x)) --> (ALL x. P(x))",
    "|- (ALL y. EX x. R(x, y)) --> (EX x. ALL y. R(x, y))",
    "|- (ALL x. P(x) | Q(x)) --> ((ALL x. P(x)) | (ALL x. Q(x)))",
    "|- ((ALL x. P(x)) --> (ALL x. Q(x))) --> (ALL x. P(x) --> Q(x))",
    "|- (EX x. P(x)) & (EX x. Q(x)) --> (EX x. P(x) & Q(x))",
    "|- (EX x. P(x)) --> P(a)",
    "|- ~(ALL x. P(x)) --> (ALL x. ~P(x))",
    "ALL x. P(x) --> Q(x) |- Q(b) --> P(b)",
    "|- (ALL x. EX y. R(x, y)) --> (EX y. ALL x. R(x, y))",
)


def test_criterion_8_quantified_suite():
    assert len(_TAUTOLOGIES) >= 10 and len(_NON_THEOREMS) >= 10
    for text in _TAUTOLOGIES:
        seq = parse_sequent(text)
        assert oracles.fm_valid(seq), f"oracle rejects {text}"
        thm = prove(text, depth_tac(15))
        assert thm.sequent == seq
    for text in _NON_THEOREMS:
        seq = parse_sequent(text)
        assert oracles.fm_countermodel(seq) is not None, f"oracle accepts {text}"
        with pytest.raises(TacticFailed):
            prove(text, depth_tac(15))
    ok(
        "8 (quantified suite)",
        f"{len(_TAUTOLOGIES)} oracle-validated tautologies proved at depth 15; "
        f"{len(_NON_THEOREMS)} non-theorems yield no proof",
    )


# ---------------------------------------------------------------------------
# criterion 9: CLI golden transcripts and exit codes


def test_criterion_9_cli_golden():
    script = (
        "goal P & Q |- Q & P\n"
        "apply rule conj_l g1\n"
        "apply rule conj_r g2\n"
        "apply basic g3\n"
        "apply basic g4\n"
        "qed\n"
        "goal P(?x) |- P(c)\n"
        "apply basic\n"
        "qed\n"
        "goal |- P\n"
        "expect fail\n"
        "apply DEPTH 6\n"
    )
    runs = []
    for _ in range(3):
        buf = io.StringIO()
        code = run_script_text(script, buf)
        runs.append((code, buf.getvalue()))
    assert all(code == 0 for code, _ in runs)
    assert len({text for _, text in runs}) == 1, "transcripts differ across runs"

    fail_buf = io.StringIO()
    assert run_script_text("goal |- P\napply basic\n", fail_buf) == 1
    assert "error at line 2" in fail_buf.getvalue()
    assert run_script("/does/not/exist.pfs") == 2
    ok(
        "9 (CLI golden)",
        "byte-identical transcripts across 3 runs; exit codes 0 (success), "
        "1 (proof failure, with line number), 2 (unreadable script)",
    )


# ---------------------------------------------------------------------------
# criterion 2 LAST: the oracle audits everything minted by the tests above


def test_criterion_2_kernel_soundness(minted_theorems):
    distinct: dict[str, Sequent] = {}
    for t in minted_theorems:
        distinct.setdefault(print_sequent(t.sequent), t.sequent)
    assert len(distinct) > 300, "expected a substantial battery of theorems"
    violations = []
    skipped = 0
    for text, seq in distinct.items():
        try:
            if not oracles.sequent_valid(seq):
                violations.append(text)
        except oracles.OracleTooBig:
            skipped += 1
    assert not violations, violations[:5]
    assert skipped <= len(distinct) // 20, f"{skipped} sequents outside the oracle envelope"
    ok(
        "2 (kernel soundness)",
        f"{len(minted_theorems)} theorems minted, {len(distinct)} distinct sequents "
        f"all validated by the oracle ({skipped} outside the enumerable envelope)",
    )
