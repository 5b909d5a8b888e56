"""Executable semantics for the discrete fragment.

A State is a total map from declared variable names to finite floats.
Jump sets update their targets simultaneously (all right-hand sides read the
pre-state); everything not assigned stays bit-identical. Random assignments
enumerate a deterministic ascending grid over the variable's declared
interval. Tests keep the state when true and block otherwise.

compile_term/compile_formula build closures used by the integrator and the
checker on their hot paths; they compute exactly what eval_term/eval_formula
compute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

from .dsl import ast as A
from .dsl.printer import pretty_print
from .errors import EvalError, SemanticError, UnsupportedFormulaError

__all__ = [
    "State",
    "check_state",
    "eval_term",
    "eval_formula",
    "compile_term",
    "compile_formula",
    "sample_interval",
    "DiscreteStep",
    "successors_discrete",
    "live_at_entry",
]

State = "dict[str, float]"

STRICT_BOUND_INSET = 1e-9  # strict interval endpoints move inward by this


def check_state(state: "dict[str, float]", declared: "tuple[str, ...] | None" = None) -> None:
    """Reject states with missing variables or non-finite values."""
    if declared is not None:
        missing = sorted(set(declared) - set(state))
        if missing:
            raise SemanticError(f"state is missing declared variable(s): {', '.join(missing)}")
    for name, value in state.items():
        if not math.isfinite(value):
            raise SemanticError(f"state value for {name!r} is not finite: {value!r}")


# ---------------------------------------------------------------- evaluation

def eval_term(state: "dict[str, float]", term: A.Term) -> float:
    if isinstance(term, A.Var):
        try:
            return state[term.name]
        except KeyError:
            raise EvalError(f"unbound variable {term.name!r}") from None
    if isinstance(term, A.Num):
        return term.value
    args = [eval_term(state, a) for a in term.args]
    op = term.op
    if op == "+":
        return args[0] + args[1]
    if op == "-":
        return args[0] - args[1]
    if op == "*":
        return args[0] * args[1]
    if op == "/":
        if args[1] == 0.0:
            raise EvalError(_div_zero_message(term))
        return args[0] / args[1]
    if op == "neg":
        return -args[0]
    if op == "min":
        return min(args)
    return max(args)


def _div_zero_message(term: A.Apply) -> str:
    where = f" at line {term.loc[0]}, column {term.loc[1]}" if term.loc else ""
    return f"division by zero in {pretty_print(term)!r}{where}"


def eval_formula(state: "dict[str, float]", formula: A.Formula) -> bool:
    if isinstance(formula, A.BoolLit):
        return formula.value
    if isinstance(formula, A.Compare):
        lhs = eval_term(state, formula.lhs)
        rhs = eval_term(state, formula.rhs)
        return _compare(formula.op, lhs, rhs)
    if isinstance(formula, A.Not):
        return not eval_formula(state, formula.body)
    if isinstance(formula, A.And):
        return eval_formula(state, formula.lhs) and eval_formula(state, formula.rhs)
    if isinstance(formula, A.Or):
        return eval_formula(state, formula.lhs) or eval_formula(state, formula.rhs)
    if isinstance(formula, A.Implies):
        return (not eval_formula(state, formula.lhs)) or eval_formula(state, formula.rhs)
    raise UnsupportedFormulaError(
        "quantifiers and modalities cannot be evaluated on a single state; "
        "use the bounded checker for Box/Diamond properties"
    )


def _compare(op: str, lhs: float, rhs: float) -> bool:
    if op == "<":
        return lhs < rhs
    if op == "<=":
        return lhs <= rhs
    if op == "=":
        return lhs == rhs
    if op == ">=":
        return lhs >= rhs
    return lhs > rhs


# ---------------------------------------------------------------- compilation

def compile_term(term: A.Term) -> "Callable[[dict[str, float]], float]":
    if isinstance(term, A.Var):
        name = term.name

        def var_fn(state, _name=name):
            try:
                return state[_name]
            except KeyError:
                raise EvalError(f"unbound variable {_name!r}") from None

        return var_fn
    if isinstance(term, A.Num):
        value = term.value
        return lambda state: value
    fns = tuple(compile_term(a) for a in term.args)
    op = term.op
    if op == "+":
        f, g = fns
        return lambda s: f(s) + g(s)
    if op == "-":
        f, g = fns
        return lambda s: f(s) - g(s)
    if op == "*":
        f, g = fns
        return lambda s: f(s) * g(s)
    if op == "/":
        f, g = fns
        message = _div_zero_message(term)

        def div_fn(s):
            d = g(s)
            if d == 0.0:
                raise EvalError(message)
            return f(s) / d

        return div_fn
    if op == "neg":
        (f,) = fns
        return lambda s: -f(s)
    if op == "min":
        f, g = fns
        return lambda s: min(f(s), g(s))
    f, g = fns
    return lambda s: max(f(s), g(s))


def compile_formula(formula: A.Formula) -> "Callable[[dict[str, float]], bool]":
    if isinstance(formula, A.BoolLit):
        value = formula.value
        return lambda s: value
    if isinstance(formula, A.Compare):
        lhs = compile_term(formula.lhs)
        rhs = compile_term(formula.rhs)
        op = formula.op
        if op == "<":
            return lambda s: lhs(s) < rhs(s)
        if op == "<=":
            return lambda s: lhs(s) <= rhs(s)
        if op == "=":
            return lambda s: lhs(s) == rhs(s)
        if op == ">=":
            return lambda s: lhs(s) >= rhs(s)
        return lambda s: lhs(s) > rhs(s)
    if isinstance(formula, A.Not):
        body = compile_formula(formula.body)
        return lambda s: not body(s)
    if isinstance(formula, A.And):
        f, g = compile_formula(formula.lhs), compile_formula(formula.rhs)
        return lambda s: f(s) and g(s)
    if isinstance(formula, A.Or):
        f, g = compile_formula(formula.lhs), compile_formula(formula.rhs)
        return lambda s: f(s) or g(s)
    if isinstance(formula, A.Implies):
        f, g = compile_formula(formula.lhs), compile_formula(formula.rhs)
        return lambda s: (not f(s)) or g(s)
    raise UnsupportedFormulaError(
        "quantifiers and modalities cannot be evaluated on a single state; "
        "use the bounded checker for Box/Diamond properties"
    )


# ---------------------------------------------------------------- sampling

def sample_interval(interval: A.Interval, points: int) -> "list[float]":
    """Ascending grid over an interval, endpoints included.

    Strict endpoints move inward by STRICT_BOUND_INSET. A degenerate interval
    yields one point; points == 1 on a wide interval yields the low endpoint.
    """
    lo = interval.lo + STRICT_BOUND_INSET if interval.lo_strict else interval.lo
    hi = interval.hi - STRICT_BOUND_INSET if interval.hi_strict else interval.hi
    if hi < lo:  # inset collapsed a very narrow open interval
        mid = 0.5 * (interval.lo + interval.hi)
        return [mid]
    if lo == hi or points == 1:
        return [lo]
    step = (hi - lo) / (points - 1)
    grid = [lo + i * step for i in range(points - 1)]
    grid.append(hi)
    out: list[float] = []
    for value in grid:  # dedupe while keeping ascending order
        if not out or value != out[-1]:
            out.append(value)
    return out


# ---------------------------------------------------------------- discrete steps

@dataclass(frozen=True)
class DiscreteStep:
    """One primitive discrete transition, for traces and replay."""

    node_id: int
    kind: str  # "assign" | "random_assign" | "test"
    post: "dict[str, float]"
    value: "float | None" = None  # chosen value for random_assign


class _NodeIds:
    """Node-id lookup that tolerates programs not indexed in advance."""

    def __init__(self, by_identity: "dict[int, int] | None"):
        self.by_identity = by_identity

    def of(self, node: A.Program) -> int:
        if self.by_identity is None:
            return -1
        return self.by_identity.get(id(node), -1)


def successors_discrete(
    state: "dict[str, float]",
    program: A.Program,
    grid_points: int,
    ranges: "Mapping[str, A.Interval]",
    node_ids: "dict[int, int] | None" = None,
) -> "list[tuple[dict[str, float], tuple[DiscreteStep, ...]]]":
    """All successor states of a loop-free discrete program, in order.

    Exploration order is syntactic left-to-right with random-assignment grids
    ascending. A blocked program (failing test) contributes nothing; the
    result may be empty. ODE and loop nodes are rejected: flows and loop
    bounds belong to the checker.
    """
    check_state(state)
    ids = _NodeIds(node_ids)
    return list(_exec_discrete(state, program, grid_points, ranges, (), ids))


def _exec_discrete(
    state,
    program: A.Program,
    grid_points: int,
    ranges,
    events: "tuple[DiscreteStep, ...]",
    ids: _NodeIds,
) -> "Iterator[tuple[dict[str, float], tuple[DiscreteStep, ...]]]":
    if isinstance(program, A.Assign):
        post = apply_jump_set(state, program)
        yield post, events + (DiscreteStep(ids.of(program), "assign", post),)
    elif isinstance(program, A.RandomAssign):
        try:
            interval = ranges[program.var]
        except KeyError:
            raise SemanticError(
                f"random assignment to {program.var!r} but no declared interval"
            ) from None
        for value in sample_interval(interval, grid_points):
            post = dict(state)
            post[program.var] = value
            yield post, events + (DiscreteStep(ids.of(program), "random_assign", post, value),)
    elif isinstance(program, A.Test):
        if eval_formula(state, program.condition):
            yield state, events + (DiscreteStep(ids.of(program), "test", state),)
    elif isinstance(program, A.Choice):
        yield from _exec_discrete(state, program.left, grid_points, ranges, events, ids)
        yield from _exec_discrete(state, program.right, grid_points, ranges, events, ids)
    elif isinstance(program, A.Seq):
        for mid, ev in _exec_discrete(state, program.first, grid_points, ranges, events, ids):
            yield from _exec_discrete(mid, program.second, grid_points, ranges, ev, ids)
    elif isinstance(program, A.Star):
        raise SemanticError("loops are handled by the checker's bound, not by discrete successors")
    elif isinstance(program, A.Ode):
        raise SemanticError("continuous flows are handled by the integrator, not by discrete successors")
    else:
        raise SemanticError(f"not a program node: {program!r}")


def apply_jump_set(state: "dict[str, float]", node: A.Assign) -> "dict[str, float]":
    """Simultaneous update: right-hand sides all evaluate in the pre-state."""
    values = [(name, eval_term(state, term)) for name, term in node.targets]
    post = dict(state)
    for name, value in values:
        if not math.isfinite(value):
            raise EvalError(f"assignment to {name!r} produced non-finite value {value!r}")
        post[name] = value
    return post


# ---------------------------------------------------------------- liveness

def live_at_entry(program: A.Program) -> "set[str]":
    """Variables whose entry value can be observed before being overwritten."""
    reads, _writes = _reads_writes(program)
    return reads


def _reads_writes(p: A.Program) -> "tuple[set[str], set[str]]":
    """(read-before-write variables, definitely-written variables)."""
    if isinstance(p, A.Assign):
        reads: set[str] = set()
        for _, term in p.targets:
            reads |= A.term_vars(term)
        return reads, {name for name, _ in p.targets}
    if isinstance(p, A.RandomAssign):
        return set(), {p.var}
    if isinstance(p, A.Test):
        return A.formula_vars(p.condition), set()
    if isinstance(p, A.Ode):
        reads = {name for name, _ in p.derivatives} | A.formula_vars(p.domain)
        for _, term in p.derivatives:
            reads |= A.term_vars(term)
        return reads, set()  # evolved values depend on the entry state
    if isinstance(p, A.Choice):
        r1, w1 = _reads_writes(p.left)
        r2, w2 = _reads_writes(p.right)
        return r1 | r2, w1 & w2
    if isinstance(p, A.Seq):
        r1, w1 = _reads_writes(p.first)
        r2, w2 = _reads_writes(p.second)
        return r1 | (r2 - w1), w1 | w2
    # Star: zero iterations possible, so nothing is definitely written
    r, _w = _reads_writes(p.body)
    return r, set()
