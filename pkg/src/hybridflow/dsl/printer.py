"""Canonical text form of ASTs; parse(pretty_print(a)) == a structurally.

Parentheses and braces are minimal: a child is wrapped only when its
precedence would reassociate under reparsing. Terms print compactly
("Vo*k1", "a+b"); logical connectives are spaced ("k1>=0 & k2>=0").
"""

from __future__ import annotations

from . import ast as A

__all__ = ["pretty_print"]

_TERM_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3}


def _term(t: A.Term, parent_prec: int = 0, right_side: bool = False) -> str:
    if isinstance(t, A.Var):
        return t.name
    if isinstance(t, A.Num):
        return repr(t.value) if t.value != int(t.value) else str(int(t.value))
    if t.op in ("min", "max"):
        return f"{t.op}({_term(t.args[0])}, {_term(t.args[1])})"
    if t.op == "neg":
        inner = _term(t.args[0], _TERM_PREC["neg"], False)
        if isinstance(t.args[0], A.Apply) and t.args[0].op not in ("min", "max", "neg"):
            inner = f"({inner})"
        return f"-{inner}"
    prec = _TERM_PREC[t.op]
    lhs = _term(t.args[0], prec, False)
    rhs = _term(t.args[1], prec, True)
    if isinstance(t.args[0], A.Apply) and t.args[0].op not in ("min", "max") and _TERM_PREC[t.args[0].op] < prec:
        lhs = f"({lhs})"
    if isinstance(t.args[1], A.Apply) and t.args[1].op not in ("min", "max") and _TERM_PREC[t.args[1].op] <= prec:
        # left-associative grammar: a right child at equal precedence reassociates
        rhs = f"({rhs})"
    return f"{lhs}{t.op}{rhs}"


# formula precedence: -> 1, | 2, & 3, unary 4, atom 5
def _formula(f: A.Formula, parent_prec: int = 0) -> str:
    text, prec = _formula_prec(f)
    if prec < parent_prec:
        return f"({text})"
    return text


def _formula_prec(f: A.Formula) -> "tuple[str, int]":
    if isinstance(f, A.BoolLit):
        return ("true" if f.value else "false", 5)
    if isinstance(f, A.Compare):
        return (f"{_term(f.lhs)}{f.op}{_term(f.rhs)}", 5)
    if isinstance(f, A.Not):
        return (f"!{_formula(f.body, 4)}", 4)
    if isinstance(f, A.And):
        # left-assoc: right child at equal precedence needs parens
        lhs = _formula(f.lhs, 3)
        rhs = _formula(f.rhs, 4)
        return (f"{lhs} & {rhs}", 3)
    if isinstance(f, A.Or):
        lhs = _formula(f.lhs, 2)
        rhs = _formula(f.rhs, 3)
        return (f"{lhs} | {rhs}", 2)
    if isinstance(f, A.Implies):
        # right-assoc: left child at equal precedence needs parens
        lhs = _formula(f.lhs, 2)
        rhs = _formula(f.rhs, 1)
        return (f"{lhs} -> {rhs}", 1)
    if isinstance(f, A.Forall):
        return (f"forall {f.var} {_formula(f.body, 4)}", 4)
    if isinstance(f, A.Exists):
        return (f"exists {f.var} {_formula(f.body, 4)}", 4)
    if isinstance(f, A.Box):
        return (f"[{_program(f.program)}] {_formula(f.body, 4)}", 4)
    if isinstance(f, A.Diamond):
        return (f"<{_program(f.program)}> {_formula(f.body, 4)}", 4)
    raise TypeError(f"not a formula: {f!r}")


# program precedence: ++ 1, ; 2, atom 3
def _program(p: A.Program, parent_prec: int = 0) -> str:
    text, prec = _program_prec(p)
    if prec < parent_prec:
        return "{" + text + "}"
    return text


def _program_prec(p: A.Program) -> "tuple[str, int]":
    if isinstance(p, A.Assign):
        return (", ".join(f"{name}:={_term(term)}" for name, term in p.targets), 3)
    if isinstance(p, A.RandomAssign):
        return (f"{p.var}:=*", 3)
    if isinstance(p, A.Test):
        body, fprec = _formula_prec(p.condition)
        return (f"?{body}" if fprec == 5 else f"?({body})", 3)
    if isinstance(p, A.Ode):
        derivs = ", ".join(f"{name}'={_term(term)}" for name, term in p.derivatives)
        if p.domain == A.BoolLit(True):
            return ("{" + derivs + "}", 3)
        return ("{" + derivs + " & " + _formula(p.domain) + "}", 3)
    if isinstance(p, A.Choice):
        lhs = _program(p.left, 2)   # strict: left child Choice reassociates
        rhs = _program(p.right, 1)
        return (f"{lhs} ++ {rhs}", 1)
    if isinstance(p, A.Seq):
        lhs = _program(p.first, 3)  # strict: left child Seq reassociates
        rhs = _program(p.second, 2)
        return (f"{lhs}; {rhs}", 2)
    if isinstance(p, A.Star):
        if isinstance(p.body, A.Ode):
            return (_program_prec(p.body)[0] + "*", 3)  # ODE braces already group
        return ("{" + _program(p.body) + "}*", 3)
    raise TypeError(f"not a program: {p!r}")


def pretty_print(node) -> str:
    """Render a term, formula, or program as canonical DSL text."""
    if isinstance(node, (A.Var, A.Num, A.Apply)):
        return _term(node)
    if isinstance(node, (A.BoolLit, A.Compare, A.Not, A.And, A.Or, A.Implies,
                         A.Forall, A.Exists, A.Box, A.Diamond)):
        return _formula(node)
    return _program(node)
