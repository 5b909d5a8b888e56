"""Hybrid-program DSL: syntax trees, parser, and pretty-printer."""

from .ast import (
    And,
    Apply,
    Assign,
    BoolLit,
    Box,
    Choice,
    Compare,
    ConstDecl,
    Diamond,
    Exists,
    Forall,
    Formula,
    Implies,
    Interval,
    ModelFile,
    Not,
    Num,
    Ode,
    Or,
    Program,
    RandomAssign,
    Seq,
    Star,
    Term,
    Test,
    Var,
    VarDecl,
    assigned_vars,
    formula_vars,
    index_program,
    is_first_order,
    is_quantifier_free,
    program_vars,
    term_vars,
    validate_program,
)
from .parser import parse_formula, parse_model, parse_program, parse_term
from .printer import pretty_print

__all__ = [
    "And", "Apply", "Assign", "BoolLit", "Box", "Choice", "Compare", "ConstDecl",
    "Diamond", "Exists", "Forall", "Formula", "Implies", "Interval", "ModelFile",
    "Not", "Num", "Ode", "Or", "Program", "RandomAssign", "Seq", "Star", "Term",
    "Test", "Var", "VarDecl",
    "assigned_vars", "formula_vars", "index_program", "is_first_order",
    "is_quantifier_free", "program_vars", "term_vars", "validate_program",
    "parse_formula", "parse_model", "parse_program", "parse_term",
    "pretty_print",
]
