"""Bounded falsification of Box/Diamond properties over hybrid programs.

The checker enumerates a finite, deterministic under-approximation of a
model's runs: discrete choices branch exhaustively at every occurrence, loops
unroll up to loop_bound, random assignments range over an ascending grid per
declared interval, and flow durations over sampled stop times. Real-valued
nondeterminism is resolved per scenario: the first execution of a random
assignment or flow site branches over its whole grid, and later executions
of the same site within one run replay that run's pick (a piecewise-constant
scenario). This keeps the run count proportional to the product of per-site
grid sizes instead of exponential in the loop bound.

The checked formula is evaluated at every run boundary (loop prefixes
included) and continuously inside every flow, so a density dipping negative
mid-flow is caught even when no sampled stop time lands on it.

A CounterexampleFound/WitnessFound verdict comes with a trace that replay()
re-executes and certifies. NoViolationAtBound is not a proof: it only says
the sampled under-approximation contains no violation.

Exploration order is fixed: initial states ascending per declared dimension
(last declaration varying fastest), then syntactic left-to-right, grids and
durations ascending, in-flow times ascending. Reports are byte-stable across
runs and worker counts.
"""

from __future__ import annotations

import itertools
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator

from math import isfinite as _isfinite

from .dsl import ast as A
from .errors import EvalError, SemanticError, UnsupportedFormulaError
from .integrator import FlowPass, PreparedOde, flow_durations, prepare_ode
from .semantics import (
    DiscreteStep,
    compile_formula,
    compile_term,
    live_at_entry,
    sample_interval,
)
from .trace import Trace

__all__ = [
    "CheckOptions",
    "CheckStats",
    "CheckReport",
    "check_box",
    "check_diamond",
    "replay",
    "REPORT_SCHEMA",
    "VERDICT_COUNTEREXAMPLE",
    "VERDICT_NO_VIOLATION",
    "VERDICT_WITNESS",
    "VERDICT_NO_WITNESS",
]

REPORT_SCHEMA = "hybridflow-report/1"
NOT_A_PROOF = (
    "bounded falsification: a counterexample is definitive, but "
    "NoViolationAtBound/NoWitnessAtBound only covers the sampled runs and is not a proof"
)

VERDICT_COUNTEREXAMPLE = "CounterexampleFound"
VERDICT_NO_VIOLATION = "NoViolationAtBound"
VERDICT_WITNESS = "WitnessFound"
VERDICT_NO_WITNESS = "NoWitnessAtBound"

THREADS_ENV = "HYBRIDFLOW_THREADS"


@dataclass(frozen=True)
class CheckOptions:
    loop_bound: int = 3
    grid_points: int = 9
    duration_samples: int = 8
    step: float = 1e-3
    horizon: float = 1.0
    init_samples: int = 3
    event_tol: float = 1e-9
    seed: "int | None" = None  # reserved; exploration is deterministic

    def __post_init__(self) -> None:
        for name in ("loop_bound", "grid_points", "duration_samples", "init_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.step <= 0.0:
            raise ValueError("step must be > 0")
        if self.horizon <= 0.0:
            raise ValueError("horizon must be > 0")
        if self.event_tol <= 0.0:
            raise ValueError("event_tol must be > 0")

    def to_dict(self) -> dict:
        return {
            "loop_bound": self.loop_bound,
            "grid_points": self.grid_points,
            "duration_samples": self.duration_samples,
            "step": self.step,
            "horizon": self.horizon,
            "init_samples": self.init_samples,
            "event_tol": self.event_tol,
            "seed": self.seed,
        }


@dataclass
class CheckStats:
    states_explored: int = 0
    flows_integrated: int = 0

    def absorb(self, other: "CheckStats") -> None:
        self.states_explored += other.states_explored
        self.flows_integrated += other.flows_integrated


@dataclass
class CheckReport:
    mode: str  # "box" | "diamond"
    model: str
    verdict: str
    options: CheckOptions
    stats: CheckStats
    counterexample: "Trace | None"
    target: "str | None" = None  # pretty-printed diamond target
    wall_time_s: float = 0.0  # informational; kept out of the byte-stable JSON

    @property
    def holds_at_bound(self) -> bool:
        return self.verdict in (VERDICT_NO_VIOLATION, VERDICT_WITNESS)

    def to_json_dict(self) -> dict:
        from .trace import trace_to_csv, trace_to_json_dict

        data: dict = {
            "schema": REPORT_SCHEMA,
            "mode": self.mode,
            "model": self.model,
            "verdict": self.verdict,
            "options": self.options.to_dict(),
            "stats": {
                "states_explored": self.stats.states_explored,
                "flows_integrated": self.stats.flows_integrated,
            },
            "note": NOT_A_PROOF,
            "counterexample": None,
            "trace_csv": None,
        }
        if self.target is not None:
            data["target"] = self.target
        if self.counterexample is not None:
            data["counterexample"] = trace_to_json_dict(self.counterexample)
            data["trace_csv"] = trace_to_csv(self.counterexample)
        return data

    def to_json(self, indent: "int | None" = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)


class _Found(Exception):
    """Internal: a hit state was reached inside a flow."""

    def __init__(self, events: "tuple", final: "dict[str, float]"):
        self.events = events
        self.final = final


@dataclass
class _Hit:
    events: "tuple"
    final: "dict[str, float]"
    initial_state: "dict[str, float]" = field(default_factory=dict)


class _Explorer:
    """Shared, immutable exploration context (thread-safe)."""

    def __init__(self, model: A.ModelFile, opts: CheckOptions, hit_formula: A.Formula):
        self.model = model
        self.opts = opts
        self.nodes, self.node_ids = A.index_program(model.program)
        self.hit_formula = hit_formula
        self.hit_fn = compile_formula(hit_formula)

        self.guards: dict[int, Callable] = {}
        self.assign_fns: dict[int, tuple] = {}
        self.grids: dict[int, list[float]] = {}
        self.prepared_odes: dict[int, PreparedOde] = {}
        for nid, node in enumerate(self.nodes):
            if isinstance(node, A.Test):
                self.guards[nid] = compile_formula(node.condition)
            elif isinstance(node, A.Assign):
                self.assign_fns[nid] = tuple(
                    (name, compile_term(term)) for name, term in node.targets
                )
            elif isinstance(node, A.RandomAssign):
                self.grids[nid] = sample_interval(
                    model.interval_of(node.var), opts.grid_points
                )
            elif isinstance(node, A.Ode):
                self.prepared_odes[nid] = prepare_ode(node)

    def initial_states(self, observed: "set[str]") -> "list[dict[str, float]]":
        """Grid over the declared region, odometer order.

        Dimensions whose entry value is unobservable (overwritten before any
        read, absent from the checked formula) collapse to their low sample,
        keeping the grid proportional to the region that matters.
        """
        names: list[str] = []
        axes: list[list[float]] = []
        for decl in self.model.constants:
            names.append(decl.name)
            axes.append(sample_interval(decl.bounds, self.opts.init_samples))
        for decl in self.model.variables:
            names.append(decl.name)
            points = self.opts.init_samples if decl.name in observed else 1
            axes.append(sample_interval(decl.init, points))
        states = []
        for combo in itertools.product(*axes):
            states.append(dict(zip(names, combo)))
        return states


class _PartitionRun:
    """Depth-first exploration from one initial state (single-threaded)."""

    def __init__(self, ctx: _Explorer):
        self.ctx = ctx
        self.opts = ctx.opts
        self.stats = CheckStats()

    def explore(self, init_state: "dict[str, float]") -> "_Hit | None":
        try:
            for end_state, _scen, events in self._exec(
                self.ctx.model.program, init_state, {}, ()
            ):
                self.stats.states_explored += 1
                if self.ctx.hit_fn(end_state):
                    return _Hit(events, end_state)
        except _Found as found:
            return _Hit(found.events, found.final)
        return None

    def _exec(self, prog: A.Program, state, scen, events) -> Iterator:
        if isinstance(prog, A.Seq):
            for s1, sc1, ev1 in self._exec(prog.first, state, scen, events):
                yield from self._exec(prog.second, s1, sc1, ev1)
        elif isinstance(prog, A.Choice):
            yield from self._exec(prog.left, state, scen, events)
            yield from self._exec(prog.right, state, scen, events)
        elif isinstance(prog, A.Test):
            nid = self.ctx.node_ids[id(prog)]
            if self.ctx.guards[nid](state):
                yield state, scen, events + (DiscreteStep(nid, "test", state),)
        elif isinstance(prog, A.Assign):
            nid = self.ctx.node_ids[id(prog)]
            values = [(name, fn(state)) for name, fn in self.ctx.assign_fns[nid]]
            post = dict(state)
            for name, value in values:
                if not _isfinite(value):
                    raise EvalError(f"assignment to {name!r} produced non-finite value {value!r}")
                post[name] = value
            yield post, scen, events + (DiscreteStep(nid, "assign", post),)
        elif isinstance(prog, A.RandomAssign):
            nid = self.ctx.node_ids[id(prog)]
            if nid in scen:
                picks = (scen[nid],)
                for value in picks:
                    post = dict(state)
                    post[prog.var] = value
                    yield post, scen, events + (
                        DiscreteStep(nid, "random_assign", post, value),
                    )
            else:
                for value in self.ctx.grids[nid]:
                    post = dict(state)
                    post[prog.var] = value
                    scen2 = dict(scen)
                    scen2[nid] = value
                    yield post, scen2, events + (
                        DiscreteStep(nid, "random_assign", post, value),
                    )
        elif isinstance(prog, A.Star):
            yield from self._unroll(prog, state, scen, events, 0)
        elif isinstance(prog, A.Ode):
            yield from self._flow(prog, state, scen, events)
        else:  # pragma: no cover - parser prevents this
            raise SemanticError(f"not a program node: {prog!r}")

    def _unroll(self, star: A.Star, state, scen, events, depth: int) -> Iterator:
        yield state, scen, events  # stopping here is a complete run
        if depth >= self.opts.loop_bound:
            return
        for s1, sc1, ev1 in self._exec(star.body, state, scen, events):
            yield from self._unroll(star, s1, sc1, ev1, depth + 1)

    def _flow(self, ode: A.Ode, state, scen, events) -> Iterator:
        nid = self.ctx.node_ids[id(ode)]
        flow = FlowPass(
            ode,
            state,
            self.opts.horizon,
            self.opts.step,
            self.opts.event_tol,
            node_id=nid,
            prepared=self.ctx.prepared_odes[nid],
        )
        self.stats.flows_integrated += 1
        if not flow.admissible:
            return  # the domain fails at entry; no flow, not even zero-duration
        t_hit = flow.first_time(self.ctx.hit_fn, self.ctx.hit_formula)
        if t_hit is not None:
            segment = flow.segment(t_hit, self.opts.duration_samples)
            raise _Found(events + (segment,), segment.end)
        durations = flow_durations(flow.t_end, self.opts.duration_samples, self.opts.step)
        if nid in scen:
            index = min(scen[nid], len(durations) - 1)
            segment = flow.segment(durations[index], self.opts.duration_samples)
            yield segment.end, scen, events + (segment,)
            return
        seen: set[float] = set()
        for index, duration in enumerate(durations):
            if duration in seen:
                continue
            seen.add(duration)
            segment = flow.segment(duration, self.opts.duration_samples)
            scen2 = dict(scen)
            scen2[nid] = index
            yield segment.end, scen2, events + (segment,)


def _workers_from_env() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_check(model: A.ModelFile, opts: CheckOptions, hit_formula: A.Formula,
               observed_extra: "set[str]") -> "tuple[_Hit | None, CheckStats]":
    ctx = _Explorer(model, opts, hit_formula)
    observed = live_at_entry(model.program) | observed_extra
    inits = ctx.initial_states(observed)
    workers = min(_workers_from_env(), len(inits))

    def run_one(init_state):
        run = _PartitionRun(ctx)
        hit = run.explore(init_state)
        if hit is not None:
            hit.initial_state = init_state
        return hit, run.stats

    total = CheckStats()
    if workers <= 1:
        for init_state in inits:
            hit, stats = run_one(init_state)
            total.absorb(stats)
            if hit is not None:
                return hit, total
        return None, total

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_one, init_state) for init_state in inits]
        winner: "_Hit | None" = None
        for future in futures:  # ordered reduction keeps the verdict sequential
            if winner is not None:
                future.cancel()
                continue
            hit, stats = future.result()
            total.absorb(stats)
            if hit is not None:
                winner = hit
        return winner, total


def _require_checkable(formula: A.Formula, what: str) -> None:
    if not (A.is_first_order(formula) and A.is_quantifier_free(formula)):
        raise UnsupportedFormulaError(
            f"{what} must be quantifier-free and modality-free for bounded checking"
        )


def check_box(model: A.ModelFile, opts: "CheckOptions | None" = None) -> CheckReport:
    """Search the bounded run set for a state falsifying the safety formula."""
    opts = opts or CheckOptions()
    _require_checkable(model.safety, "safety formula")
    started = time.perf_counter()
    hit, stats = _run_check(model, opts, A.Not(model.safety), A.formula_vars(model.safety))
    wall = time.perf_counter() - started
    if hit is None:
        return CheckReport("box", model.name, VERDICT_NO_VIOLATION, opts, stats, None,
                           wall_time_s=wall)
    trace = Trace(model.name, model.declared_names(), hit.initial_state, hit.events, hit.final)
    return CheckReport("box", model.name, VERDICT_COUNTEREXAMPLE, opts, stats, trace,
                       wall_time_s=wall)


def check_diamond(model: A.ModelFile, target: A.Formula,
                  opts: "CheckOptions | None" = None) -> CheckReport:
    """Search the bounded run set for a state satisfying the target formula."""
    from .dsl.printer import pretty_print

    opts = opts or CheckOptions()
    _require_checkable(target, "target formula")
    undeclared = sorted(A.formula_vars(target) - set(model.declared_names()))
    if undeclared:
        raise SemanticError(f"target references undeclared variable(s): {', '.join(undeclared)}")
    started = time.perf_counter()
    hit, stats = _run_check(model, opts, target, A.formula_vars(target))
    wall = time.perf_counter() - started
    if hit is None:
        return CheckReport("diamond", model.name, VERDICT_NO_WITNESS, opts, stats, None,
                           target=pretty_print(target), wall_time_s=wall)
    trace = Trace(model.name, model.declared_names(), hit.initial_state, hit.events, hit.final)
    return CheckReport("diamond", model.name, VERDICT_WITNESS, opts, stats, trace,
                       target=pretty_print(target), wall_time_s=wall)


def replay(
    trace: Trace,
    model: A.ModelFile,
    opts: "CheckOptions | None" = None,
    claim: "A.Formula | None" = None,
    claim_holds: bool = False,
) -> bool:
    """Re-execute a trace against the model and certify it.

    Every event is recomputed from the running state with the semantics
    engine and must match the recorded values exactly; random assignments
    must pick grid members, flows must respect their evolution domains, and
    the final state must decide `claim` as `claim_holds` (by default the
    model's safety formula evaluating false, certifying a counterexample).
    Returns False for any inconsistency; raises ReplayError only when the
    trace does not even fit the model structurally.
    """
    from .errors import ReplayError
    from .semantics import eval_formula, eval_term

    opts = opts or CheckOptions()
    if claim is None:
        claim = model.safety
        claim_holds = False
    nodes, _ = A.index_program(model.program)
    declared = model.declared_names()

    if trace.model != model.name or tuple(trace.variables) != declared:
        raise ReplayError("trace does not match the model's name or declarations")
    if set(trace.initial) != set(declared):
        return False
    for name in declared:
        interval = model.interval_of(name)
        if not (interval.lo <= trace.initial[name] <= interval.hi):
            return False

    state = dict(trace.initial)
    for event in trace.events:
        if not (0 <= event.node_id < len(nodes)):
            raise ReplayError(f"trace references unknown program node {event.node_id}")
        node = nodes[event.node_id]
        if isinstance(event, DiscreteStep):
            if event.kind == "test":
                if not isinstance(node, A.Test) or not eval_formula(state, node.condition):
                    return False
            elif event.kind == "assign":
                if not isinstance(node, A.Assign):
                    return False
                expect = dict(state)
                for name, term in node.targets:
                    expect[name] = eval_term(state, term)
                if event.post != expect:
                    return False
                state = expect
            elif event.kind == "random_assign":
                if not isinstance(node, A.RandomAssign) or event.value is None:
                    return False
                grid = sample_interval(model.interval_of(node.var), opts.grid_points)
                if event.value not in grid:
                    return False
                expect = dict(state)
                expect[node.var] = event.value
                if event.post != expect:
                    return False
                state = expect
            else:
                raise ReplayError(f"unknown discrete step kind {event.kind!r}")
        else:  # FlowSegment
            if not isinstance(node, A.Ode):
                return False
            flow = FlowPass(node, state, opts.horizon, opts.step, opts.event_tol,
                            node_id=event.node_id)
            if not flow.admissible or not (0.0 <= event.duration <= flow.t_end):
                return False
            recomputed = flow.segment(event.duration, opts.duration_samples)
            if recomputed.end != event.end or recomputed.samples != event.samples:
                return False
            state = recomputed.end
    if state != trace.final:
        return False
    return eval_formula(state, claim) == claim_holds
