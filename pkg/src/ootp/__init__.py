"""ootp: an LCF-style first-order prover with bundled (simultaneous)
theorems, rule objects, and tactics, plus a goto-elimination translator."""

__version__ = "0.1.0"

from .logic import (
    Formula,
    Sequent,
    Session,
    Term,
    parse_formula,
    parse_sequent,
    print_formula,
    print_sequent,
)
from .kernel import RuleObject, SimulTheorem, Theorem
from .tactics import GoalBundle, ProofState, TacticObject, depth_tac, parse_tactic, prove

__all__ = [
    "Formula",
    "GoalBundle",
    "ProofState",
    "RuleObject",
    "Sequent",
    "Session",
    "SimulTheorem",
    "TacticObject",
    "Term",
    "Theorem",
    "depth_tac",
    "parse_formula",
    "parse_sequent",
    "parse_tactic",
    "print_formula",
    "print_sequent",
    "prove",
]
