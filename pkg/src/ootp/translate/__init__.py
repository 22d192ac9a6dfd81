"""Goto-to-OO and goto-to-functional translation, verified by bisimulation."""

from .forms import (
    FunIf,
    FunLeaf,
    FunProgram,
    OOClassProgram,
    OOIf,
    OOTarget,
    emit_fun_source,
    emit_oo_source,
    translate_to_fun,
    translate_to_oo,
)
from .interp import (
    FUEL_EXHAUSTED,
    TERMINATED,
    Disagreement,
    EquivReport,
    InterpError,
    RunResult,
    active_backend,
    check_equiv,
    interp_fun,
    interp_imp,
    interp_oo,
)
from .syntax import (
    FGH_PROGRAM_SOURCE,
    Assign,
    BinOp,
    Body,
    Cond,
    Goto,
    IfTail,
    ImpParseError,
    ImpProgram,
    Num,
    Stop,
    Var,
    fgh_program,
    parse_imp,
)

__all__ = [
    "Assign",
    "BinOp",
    "Body",
    "Cond",
    "Disagreement",
    "EquivReport",
    "FUEL_EXHAUSTED",
    "FunIf",
    "FunLeaf",
    "FunProgram",
    "Goto",
    "IfTail",
    "ImpParseError",
    "ImpProgram",
    "InterpError",
    "Num",
    "OOClassProgram",
    "OOIf",
    "OOTarget",
    "FGH_PROGRAM_SOURCE",
    "RunResult",
    "Stop",
    "TERMINATED",
    "Var",
    "active_backend",
    "check_equiv",
    "emit_fun_source",
    "emit_oo_source",
    "interp_fun",
    "interp_imp",
    "interp_oo",
    "fgh_program",
    "parse_imp",
    "translate_to_fun",
    "translate_to_oo",
]
