"""Suite-wide kernel audit: every theorem minted anywhere in the test run
must have a sequent the independent oracles judge valid (truth tables for
propositional sequents, finite models for quantified ones within the
enumerable envelope)."""

from __future__ import annotations

import pytest

from ootp import kernel
from ootp.logic import print_sequent

import oracles


@pytest.fixture(scope="session", autouse=True)
def kernel_soundness_audit():
    minted: list = []
    observer = minted.append
    kernel.add_mint_observer(observer)
    yield minted
    kernel.remove_mint_observer(observer)
    distinct = {}
    for t in minted:
        distinct.setdefault(print_sequent(t.sequent), t.sequent)
    violations = []
    skipped = 0
    for text, seq in distinct.items():
        try:
            if not oracles.sequent_valid(seq):
                violations.append(text)
        except oracles.OracleTooBig:
            skipped += 1
    assert not violations, (
        f"kernel audit: {len(violations)} invalid theorems out of "
        f"{len(distinct)} distinct sequents: {violations[:5]}"
    )
