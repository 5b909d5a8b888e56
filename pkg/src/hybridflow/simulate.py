"""Single deterministic runs of a model, with nondeterminism pinned by hand.

Simulation resolves every source of nondeterminism explicitly:

  - a random assignment x := * takes the pinned value for x and fails when
    none is given (no silent defaults);
  - a choice takes its first branch that completes and does not contradict a
    pin (a branch assigning a pinned variable a different value is rejected);
  - flows run to their full duration (domain exit or horizon);
  - loops unroll exactly loop_bound times.

Pins may name constants too, overriding the declared value for the run.
The initial state is each declared interval's low point unless overridden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dsl import ast as A
from .errors import HybridflowError
from .integrator import FlowPass
from .semantics import DiscreteStep, compile_formula, compile_term, sample_interval
from .trace import Trace

__all__ = ["SimulationError", "simulate_model"]


class SimulationError(HybridflowError):
    """The pinned run is blocked or underdetermined."""


@dataclass
class _SimContext:
    pins: "dict[str, float]"
    loop_bound: int
    horizon: float
    step: float
    event_tol: float
    duration_samples: int
    node_ids: "dict[int, int]"
    missing_pins: "set[str]"


def simulate_model(
    model: A.ModelFile,
    pins: "dict[str, float] | None" = None,
    initial: "dict[str, float] | None" = None,
    loop_bound: int = 1,
    horizon: float = 1.0,
    step: float = 1e-3,
    event_tol: float = 1e-9,
    duration_samples: int = 8,
) -> Trace:
    pins = dict(pins or {})
    declared = model.declared_names()
    for source, values in (("pin", pins), ("initial override", initial or {})):
        for name, value in values.items():
            if name not in declared:
                raise SimulationError(f"{source} for undeclared variable {name!r}")
            if not math.isfinite(value):
                raise SimulationError(f"{source} for {name!r} is not finite: {value!r}")

    state: dict[str, float] = {}
    for name in declared:
        state[name] = sample_interval(model.interval_of(name), 1)[0]
    const_names = {c.name for c in model.constants}
    for name, value in pins.items():
        if name in const_names:
            state[name] = value  # pinned constant overrides the declared value
    for name, value in (initial or {}).items():
        state[name] = value

    _, node_ids = A.index_program(model.program)
    ctx = _SimContext(
        pins=pins,
        loop_bound=loop_bound,
        horizon=horizon,
        step=step,
        event_tol=event_tol,
        duration_samples=duration_samples,
        node_ids=node_ids,
        missing_pins=set(),
    )
    result = _run(model.program, state, (), ctx)
    if result is None:
        if ctx.missing_pins:
            names = ", ".join(sorted(ctx.missing_pins))
            raise SimulationError(
                f"random assignment needs an explicit pin for: {names}"
            )
        raise SimulationError("simulation blocked: no branch completes under the given pins")
    final, events = result
    return Trace(model.name, declared, state, events, final)


def _run(prog: A.Program, state, events, ctx: _SimContext):
    """First completing pinned run of prog, or None when blocked."""
    if isinstance(prog, A.Seq):
        first = _run(prog.first, state, events, ctx)
        if first is None:
            return None
        return _run(prog.second, first[0], first[1], ctx)
    if isinstance(prog, A.Choice):
        left = _run(prog.left, state, events, ctx)
        if left is not None:
            return left
        return _run(prog.right, state, events, ctx)
    if isinstance(prog, A.Test):
        if compile_formula(prog.condition)(state):
            return state, events + (DiscreteStep(ctx.node_ids[id(prog)], "test", state),)
        return None
    if isinstance(prog, A.Assign):
        values = [(name, compile_term(term)(state)) for name, term in prog.targets]
        post = dict(state)
        for name, value in values:
            post[name] = value
        for name, value in values:
            if name in ctx.pins and value != ctx.pins[name]:
                return None  # branch contradicts a pinned value
        return post, events + (DiscreteStep(ctx.node_ids[id(prog)], "assign", post),)
    if isinstance(prog, A.RandomAssign):
        if prog.var not in ctx.pins:
            ctx.missing_pins.add(prog.var)
            return None
        post = dict(state)
        post[prog.var] = ctx.pins[prog.var]
        return post, events + (
            DiscreteStep(ctx.node_ids[id(prog)], "random_assign", post, ctx.pins[prog.var]),
        )
    if isinstance(prog, A.Star):
        current = (state, events)
        for _ in range(ctx.loop_bound):
            nxt = _run(prog.body, current[0], current[1], ctx)
            if nxt is None:
                return None
            current = nxt
        return current
    if isinstance(prog, A.Ode):
        flow = FlowPass(prog, state, ctx.horizon, ctx.step, ctx.event_tol,
                        node_id=ctx.node_ids[id(prog)])
        if not flow.admissible:
            return None
        segment = flow.segment(flow.t_end, ctx.duration_samples)
        return segment.end, events + (segment,)
    raise SimulationError(f"not a program node: {prog!r}")
