"""Syntax trees for terms, formulas, hybrid programs, and model files.

Nodes are frozen dataclasses compared structurally; source locations are
carried for error reporting but excluded from equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..errors import SemanticError

__all__ = [
    "Term", "Var", "Num", "Apply",
    "Formula", "BoolLit", "Compare", "Not", "And", "Or", "Implies",
    "Forall", "Exists", "Box", "Diamond",
    "Program", "Assign", "RandomAssign", "Test", "Ode", "Choice", "Seq", "Star",
    "Interval", "ConstDecl", "VarDecl", "ModelFile",
    "term_vars", "formula_vars", "program_vars", "assigned_vars",
    "is_first_order", "is_quantifier_free", "validate_program",
    "index_program",
]

Loc = "tuple[int, int] | None"

_BINARY_OPS = {"+", "-", "*", "/", "min", "max"}
_UNARY_OPS = {"neg"}


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str
    loc: "tuple[int, int] | None" = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Num:
    value: float
    loc: "tuple[int, int] | None" = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Apply:
    op: str
    args: "tuple[Term, ...]"
    loc: "tuple[int, int] | None" = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.op in _BINARY_OPS:
            arity = 2
        elif self.op in _UNARY_OPS:
            arity = 1
        else:
            raise SemanticError(f"unknown function symbol {self.op!r}")
        if len(self.args) != arity:
            raise SemanticError(f"{self.op!r} takes {arity} argument(s), got {len(self.args)}")


Term = Union[Var, Num, Apply]


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Compare:
    op: str  # one of < <= = >= >
    lhs: Term
    rhs: Term

    def __post_init__(self) -> None:
        if self.op not in ("<", "<=", "=", ">=", ">"):
            raise SemanticError(f"unknown relation {self.op!r}")


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Or:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Box:
    program: "Program"
    body: "Formula"


@dataclass(frozen=True)
class Diamond:
    program: "Program"
    body: "Formula"


Formula = Union[BoolLit, Compare, Not, And, Or, Implies, Forall, Exists, Box, Diamond]


# ---------------------------------------------------------------- programs

@dataclass(frozen=True)
class Assign:
    """Simultaneous jump set: right-hand sides all read the pre-state."""

    targets: "tuple[tuple[str, Term], ...]"

    def __post_init__(self) -> None:
        names = [name for name, _ in self.targets]
        if not names:
            raise SemanticError("empty jump set")
        if len(set(names)) != len(names):
            dup = sorted(n for n in set(names) if names.count(n) > 1)
            raise SemanticError(f"duplicate assigned variable(s) in jump set: {', '.join(dup)}")


@dataclass(frozen=True)
class RandomAssign:
    """x := * picks any value from x's declared interval."""

    var: str


@dataclass(frozen=True)
class Test:
    condition: Formula

    def __post_init__(self) -> None:
        if not is_first_order(self.condition):
            raise SemanticError("test condition must not contain modalities")
        if not is_quantifier_free(self.condition):
            raise SemanticError("test condition must be quantifier-free")


@dataclass(frozen=True)
class Ode:
    """Continuous flow x1'=e1, ..., xn'=en restricted to the domain formula."""

    derivatives: "tuple[tuple[str, Term], ...]"
    domain: Formula

    def __post_init__(self) -> None:
        names = [name for name, _ in self.derivatives]
        if not names:
            raise SemanticError("ODE without differential equations")
        if len(set(names)) != len(names):
            dup = sorted(n for n in set(names) if names.count(n) > 1)
            raise SemanticError(f"duplicate differential variable(s): {', '.join(dup)}")
        if not (is_first_order(self.domain) and is_quantifier_free(self.domain)):
            raise SemanticError("evolution domain must be quantifier-free and modality-free")


@dataclass(frozen=True)
class Choice:
    left: "Program"
    right: "Program"


@dataclass(frozen=True)
class Seq:
    first: "Program"
    second: "Program"


@dataclass(frozen=True)
class Star:
    body: "Program"


Program = Union[Assign, RandomAssign, Test, Ode, Choice, Seq, Star]


# ---------------------------------------------------------------- model files

@dataclass(frozen=True)
class Interval:
    """Real interval with independently open/closed endpoints."""

    lo: float
    hi: float
    lo_strict: bool = False
    hi_strict: bool = False

    def __post_init__(self) -> None:
        if not (self.lo <= self.hi):
            raise SemanticError(f"empty interval: lo={self.lo}, hi={self.hi}")
        if self.lo == self.hi and (self.lo_strict or self.hi_strict):
            raise SemanticError(f"unsatisfiable interval bound at {self.lo}")

    def __str__(self) -> str:
        left = "(" if self.lo_strict else "["
        right = ")" if self.hi_strict else "]"
        return f"{left}{self.lo!r}, {self.hi!r}{right}"


@dataclass(frozen=True)
class ConstDecl:
    name: str
    bounds: Interval


@dataclass(frozen=True)
class VarDecl:
    name: str
    init: Interval


@dataclass(frozen=True)
class ModelFile:
    name: str
    constants: "tuple[ConstDecl, ...]"
    variables: "tuple[VarDecl, ...]"
    program: Program
    safety: Formula

    def declared_names(self) -> "tuple[str, ...]":
        return tuple(c.name for c in self.constants) + tuple(v.name for v in self.variables)

    def interval_of(self, name: str) -> Interval:
        for c in self.constants:
            if c.name == name:
                return c.bounds
        for v in self.variables:
            if v.name == name:
                return v.init
        raise KeyError(name)


# ---------------------------------------------------------------- traversals

def term_vars(t: Term) -> "set[str]":
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Num):
        return set()
    out: set[str] = set()
    for a in t.args:
        out |= term_vars(a)
    return out


def formula_vars(f: Formula) -> "set[str]":
    if isinstance(f, BoolLit):
        return set()
    if isinstance(f, Compare):
        return term_vars(f.lhs) | term_vars(f.rhs)
    if isinstance(f, Not):
        return formula_vars(f.body)
    if isinstance(f, (And, Or, Implies)):
        return formula_vars(f.lhs) | formula_vars(f.rhs)
    if isinstance(f, (Forall, Exists)):
        return {f.var} | formula_vars(f.body)
    return program_vars(f.program) | formula_vars(f.body)


def program_vars(p: Program) -> "set[str]":
    if isinstance(p, Assign):
        out = {name for name, _ in p.targets}
        for _, t in p.targets:
            out |= term_vars(t)
        return out
    if isinstance(p, RandomAssign):
        return {p.var}
    if isinstance(p, Test):
        return formula_vars(p.condition)
    if isinstance(p, Ode):
        out = {name for name, _ in p.derivatives}
        for _, t in p.derivatives:
            out |= term_vars(t)
        return out | formula_vars(p.domain)
    if isinstance(p, (Choice,)):
        return program_vars(p.left) | program_vars(p.right)
    if isinstance(p, Seq):
        return program_vars(p.first) | program_vars(p.second)
    return program_vars(p.body)  # Star


def assigned_vars(p: Program) -> "set[str]":
    """Variables written anywhere in p (jump sets, random assigns, ODE lhs)."""
    if isinstance(p, Assign):
        return {name for name, _ in p.targets}
    if isinstance(p, RandomAssign):
        return {p.var}
    if isinstance(p, Test):
        return set()
    if isinstance(p, Ode):
        return {name for name, _ in p.derivatives}
    if isinstance(p, Choice):
        return assigned_vars(p.left) | assigned_vars(p.right)
    if isinstance(p, Seq):
        return assigned_vars(p.first) | assigned_vars(p.second)
    return assigned_vars(p.body)  # Star


def is_first_order(f: Formula) -> bool:
    """True when f contains no Box/Diamond."""
    if isinstance(f, (BoolLit, Compare)):
        return True
    if isinstance(f, Not):
        return is_first_order(f.body)
    if isinstance(f, (And, Or, Implies)):
        return is_first_order(f.lhs) and is_first_order(f.rhs)
    if isinstance(f, (Forall, Exists)):
        return is_first_order(f.body)
    return False


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, (BoolLit, Compare)):
        return True
    if isinstance(f, Not):
        return is_quantifier_free(f.body)
    if isinstance(f, (And, Or, Implies)):
        return is_quantifier_free(f.lhs) and is_quantifier_free(f.rhs)
    if isinstance(f, (Forall, Exists)):
        return False
    return is_quantifier_free(f.body)  # Box/Diamond


def validate_program(p: Program) -> None:
    """Re-run the structural invariants over a whole tree.

    Node constructors already check locally; this walks composites so
    programmatically built trees get the same guarantees as parsed ones.
    """
    if isinstance(p, (Assign, RandomAssign, Test, Ode)):
        return
    if isinstance(p, Choice):
        validate_program(p.left)
        validate_program(p.right)
    elif isinstance(p, Seq):
        validate_program(p.first)
        validate_program(p.second)
    elif isinstance(p, Star):
        validate_program(p.body)
    else:
        raise SemanticError(f"not a program node: {p!r}")


def index_program(p: Program) -> "tuple[list[Program], dict[int, int]]":
    """Preorder numbering of program nodes.

    Returns (nodes, by_identity) where nodes[i] is the node with id i and
    by_identity maps python object identity to that id. Traces reference
    nodes by these ids.
    """
    nodes: list[Program] = []
    by_id: dict[int, int] = {}

    def walk(node: Program) -> None:
        by_id[id(node)] = len(nodes)
        nodes.append(node)
        if isinstance(node, Choice):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Seq):
            walk(node.first)
            walk(node.second)
        elif isinstance(node, Star):
            walk(node.body)

    walk(p)
    return nodes, by_id
