"""Numeric flows for ODE nodes: fixed-step RK4 with evolution-domain exit.

A flow advances the continuous variables while the evolution domain holds;
it must stop no later than the first domain exit. Exit times are bracketed
at step granularity and refined by bisection to event_tol.

Constant-rate flows (right-hand sides not referencing any evolving variable,
the common shape for junction dynamics, where fluxes are frozen by the
preceding control) evaluate in closed form x(t) = x0 + rate*t, and domain
atoms that are affine along the flow get exact crossing times instead of
bisection. This is an internal fast path with the same observable contract;
nonlinear systems take the stepped RK4 path.

Nondeterministic flow duration is under-approximated by duration_samples
stop times, evenly spaced over [0, t_end] and snapped to step multiples,
t_end itself included (t_end is the refined domain exit or the horizon).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .dsl import ast as A
from .errors import EvalError, IntegrationError
from .semantics import compile_formula, compile_term

__all__ = ["FlowSegment", "FlowPass", "PreparedOde", "prepare_ode", "integrate_flow", "flow_durations"]

_NUDGE_LIMIT = 4  # max nextafter steps when probing for an exact boundary


@dataclass(frozen=True)
class FlowSegment:
    """One admissible flow of a fixed duration, with time-stamped samples."""

    node_id: int
    start: "dict[str, float]"
    end: "dict[str, float]"
    duration: float
    step: float
    samples: "tuple[tuple[float, dict[str, float]], ...]"


@dataclass(frozen=True)
class PreparedOde:
    """Compiled artifacts of an ODE node, shareable across flow passes."""

    evolving: "tuple[str, ...]"
    rhs_fns: "tuple[Callable, ...]"
    domain_fn: "Callable[[dict[str, float]], bool]"
    constant_rate: bool  # no right-hand side reads an evolving variable


def prepare_ode(ode: A.Ode) -> PreparedOde:
    evolving = tuple(name for name, _ in ode.derivatives)
    rhs_vars: set[str] = set()
    for _, term in ode.derivatives:
        rhs_vars |= A.term_vars(term)
    return PreparedOde(
        evolving=evolving,
        rhs_fns=tuple(compile_term(term) for _, term in ode.derivatives),
        domain_fn=compile_formula(ode.domain),
        constant_rate=not (rhs_vars & set(evolving)),
    )


def flow_durations(t_end: float, samples: int, step: float) -> "list[float]":
    """Exactly `samples` ascending stop times over [0, t_end].

    Interior times snap to step multiples; the list may contain duplicates so
    positions stay meaningful across flows with different exits. One sample
    means the full duration.
    """
    if samples == 1:
        return [t_end]
    if t_end == 0.0:
        return [0.0] * samples
    out = [0.0]
    for i in range(1, samples - 1):
        raw = t_end * i / (samples - 1)
        snapped = round(raw / step) * step
        if snapped <= 0.0:
            snapped = 0.0
        if snapped >= t_end:
            snapped = t_end
        out.append(max(snapped, out[-1]))
    out.append(t_end)
    return out


class FlowPass:
    """One integration of an ODE node from a start state.

    Exposes the exit time, state reconstruction at any time in [0, t_end],
    and earliest-truth searches used for in-flow property checking.
    """

    def __init__(
        self,
        ode: A.Ode,
        start: "dict[str, float]",
        horizon: float,
        step: float,
        event_tol: float,
        node_id: int = -1,
        prepared: "PreparedOde | None" = None,
    ):
        self.ode = ode
        self.start = start
        self.horizon = horizon
        self.step = step
        self.event_tol = event_tol
        self.node_id = node_id
        if prepared is None:
            prepared = prepare_ode(ode)
        self.evolving = prepared.evolving
        self._rhs_fns = prepared.rhs_fns
        self._domain_fn = prepared.domain_fn
        self._constant_rate = prepared.constant_rate

        self.admissible = self._domain_fn(start)  # domain must hold at t=0
        if not self.admissible:
            self.t_end = 0.0
            self.exited = True
            return

        if self._constant_rate:
            try:
                self._rates = {
                    name: fn(start) for name, fn in zip(self.evolving, self._rhs_fns)
                }
            except EvalError as exc:
                raise IntegrationError(str(exc), 0.0) from exc
            for name, rate in self._rates.items():
                if not math.isfinite(rate):
                    raise IntegrationError(f"non-finite rate for {name}'", 0.0)
            self._grid = None
            self.t_end, self.exited = self._exit_time_affine()
        else:
            self._grid = self._integrate_grid()
            self.t_end, self.exited = self._exit_time_stepped()

    # -- state reconstruction

    def state_at(self, t: float) -> "dict[str, float]":
        if t == 0.0:
            return self.start
        if self._constant_rate:
            out = dict(self.start)
            for name, rate in self._rates.items():
                out[name] = self.start[name] + rate * t
            return out
        times, states = self._grid
        k = min(int(t / self.step), len(times) - 1)
        while k + 1 < len(times) and times[k + 1] <= t:
            k += 1
        while k > 0 and times[k] > t:
            k -= 1
        if times[k] == t:
            return states[k]
        return self._rk4_step(states[k], t - times[k])

    # -- searches

    def first_time(self, fn: "Callable[[dict[str, float]], bool]", formula: A.Formula) -> "float | None":
        """Earliest t in [0, t_end] with fn(state(t)) true, or None.

        Checks at every integration step; on the closed-form path the affine
        atom crossings are located exactly, which covers at least as much.
        """
        if not self.admissible:
            return None
        if fn(self.start):
            return 0.0
        if self.t_end == 0.0:
            return None
        if self._constant_rate:
            atoms = _affine_atoms(formula, self.start, self._rates)
            if atoms is not None:
                for t in self._candidates(atoms, self.t_end):
                    if fn(self.state_at(t)):
                        return t
                return None
            # constant rates but non-affine atoms: scan step states
            n_steps = int(math.ceil(self.t_end / self.step))
            for k in range(1, n_steps + 1):
                t = min(k * self.step, self.t_end)
                if fn(self.state_at(t)):
                    return t
            return None
        times, states = self._grid
        for k in range(1, len(times)):
            if times[k] > self.t_end:
                break
            if fn(states[k]):
                return times[k]
        if self.exited and self.t_end < self.horizon and fn(self.state_at(self.t_end)):
            return self.t_end
        return None

    def segment(self, duration: float, sample_points: int) -> FlowSegment:
        times = flow_durations(duration, sample_points, self.step)
        samples: list[tuple[float, dict[str, float]]] = []
        for t in times:
            if samples and samples[-1][0] == t:
                continue
            samples.append((t, self.state_at(t)))
        end = samples[-1][1]
        return FlowSegment(
            node_id=self.node_id,
            start=self.start,
            end=end,
            duration=duration,
            step=self.step,
            samples=tuple(samples),
        )

    # -- affine exit machinery

    def _exit_time_affine(self) -> "tuple[float, bool]":
        atoms = _affine_atoms(self.ode.domain, self.start, self._rates)
        if atoms is None:
            return self._exit_scan(lambda t: self._domain_fn(self.state_at(t)))
        first_bad: "float | None" = None
        last_good = 0.0
        for t in self._candidates(atoms, self.horizon):
            if not self._domain_fn(self.state_at(t)):
                first_bad = t
                break
            last_good = t
        if first_bad is None:
            return self.horizon, False
        t_exit = self._refine_exit(last_good, first_bad, lambda t: self._domain_fn(self.state_at(t)))
        return t_exit, True

    def _candidates(self, atoms: "list[tuple[float, float]]", limit: float) -> "list[float]":
        """Ascending probe times: around atom crossings, step snap-ups, the limit.

        Each positive root is probed on both sides so truth windows closing at
        a crossing are seen; the first step is always probed so windows opening
        right at t=0 (an atom on its boundary in the start state) are seen.
        Times below one ulp of zero are never probed: scaled by a rate they
        underflow to zero and report the start state's truth again.
        """
        out = {limit, min(self.step, limit)}
        for a, b in atoms:
            if b == 0.0:
                continue
            root = -a / b
            if not (0.0 <= root <= limit) or not math.isfinite(root):
                continue
            if root > 0.0:
                out.add(root)
                out.add(math.nextafter(root, math.inf))
                out.add(math.nextafter(root, 0.0))
            snapped = math.floor(root / self.step + 1.0) * self.step
            if snapped <= limit:
                out.add(snapped)
        return sorted(t for t in out if 0.0 < t <= limit)

    def _exit_scan(self, domain_at: "Callable[[float], bool]") -> "tuple[float, bool]":
        """Step scan for constant-rate flows whose domain atoms are not affine."""
        n_steps = int(math.ceil(self.horizon / self.step))
        prev = 0.0
        for k in range(1, n_steps + 1):
            t = min(k * self.step, self.horizon)
            if not domain_at(t):
                return self._refine_exit(prev, t, domain_at), True
            prev = t
        return self.horizon, False

    def _refine_exit(self, lo: float, hi: float, domain_at: "Callable[[float], bool]") -> float:
        """Largest admissible time: bisect (lo true, hi false) to event_tol."""
        for _ in range(200):
            if hi - lo <= self.event_tol * 0.5:
                break
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if domain_at(mid):
                lo = mid
            else:
                hi = mid
        # prefer the exact boundary when it is admissible
        probe = hi
        for _ in range(_NUDGE_LIMIT):
            if domain_at(probe):
                return probe
            probe = math.nextafter(probe, lo)
            if probe <= lo:
                break
        return lo

    # -- stepped RK4 machinery

    def _rk4_step(self, state: "dict[str, float]", h: float) -> "dict[str, float]":
        try:
            k1 = [fn(state) for fn in self._rhs_fns]
            mid = self._offset(state, k1, 0.5 * h)
            k2 = [fn(mid) for fn in self._rhs_fns]
            mid = self._offset(state, k2, 0.5 * h)
            k3 = [fn(mid) for fn in self._rhs_fns]
            end = self._offset(state, k3, h)
            k4 = [fn(end) for fn in self._rhs_fns]
        except EvalError as exc:
            raise IntegrationError(str(exc), h) from exc
        out = dict(state)
        for i, name in enumerate(self.evolving):
            out[name] = state[name] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        return out

    def _offset(self, state, slopes, h):
        out = dict(state)
        for i, name in enumerate(self.evolving):
            out[name] = state[name] + h * slopes[i]
        return out

    def _integrate_grid(self):
        times = [0.0]
        states = [self.start]
        k = 0
        while times[-1] < self.horizon:
            k += 1
            t_next = min(k * self.step, self.horizon)
            h = t_next - times[-1]
            try:
                nxt = self._rk4_step(states[-1], h)
            except IntegrationError as exc:
                raise IntegrationError(str(exc), times[-1]) from exc
            for name in self.evolving:
                if not math.isfinite(nxt[name]):
                    raise IntegrationError(f"state for {name!r} left the finite range", t_next)
            times.append(t_next)
            states.append(nxt)
        return times, states

    def _exit_time_stepped(self) -> "tuple[float, bool]":
        times, states = self._grid
        for k in range(1, len(times)):
            if not self._domain_fn(states[k]):
                lo_t = times[k - 1]
                base = states[k - 1]

                def domain_at(t, _base=base, _lo=lo_t):
                    return self._domain_fn(self._rk4_step(_base, t - _lo)) if t > _lo else True

                t_exit = self._refine_exit(lo_t, times[k], domain_at)
                # truncate the stored grid at the exit
                del times[k:]
                del states[k:]
                return t_exit, True
        return self.horizon, False


def integrate_flow(
    state: "dict[str, float]",
    ode: A.Ode,
    horizon: float,
    *,
    step: float = 1e-3,
    event_tol: float = 1e-9,
    duration_samples: int = 8,
    node_id: int = -1,
) -> "list[FlowSegment]":
    """Admissible flows of sampled durations from `state` along `ode`.

    Returns one segment per distinct sampled stop time, durations ascending.
    Empty when the start state already violates the evolution domain (a flow
    must satisfy it at time 0).
    """
    from .semantics import check_state

    check_state(state)
    flow = FlowPass(ode, state, horizon, step, event_tol, node_id=node_id)
    if not flow.admissible:
        return []
    segments: list[FlowSegment] = []
    seen: set[float] = set()
    for duration in flow_durations(flow.t_end, duration_samples, step):
        if duration in seen:
            continue
        seen.add(duration)
        segments.append(flow.segment(duration, duration_samples))
    return segments


# ---------------------------------------------------------------- affine atoms

def _affine_term(term: A.Term, x0: "dict[str, float]", rates: "dict[str, float]"):
    """(a, b) with value(t) = a + b*t along the flow, or None if nonlinear."""
    if isinstance(term, A.Var):
        return (x0[term.name], rates.get(term.name, 0.0))
    if isinstance(term, A.Num):
        return (term.value, 0.0)
    parts = [_affine_term(arg, x0, rates) for arg in term.args]
    if any(p is None for p in parts):
        return None
    op = term.op
    if op == "neg":
        a, b = parts[0]
        return (-a, -b)
    (a1, b1), (a2, b2) = parts
    if op == "+":
        return (a1 + a2, b1 + b2)
    if op == "-":
        return (a1 - a2, b1 - b2)
    if op == "*":
        if b2 == 0.0:
            return (a1 * a2, b1 * a2)
        if b1 == 0.0:
            return (a1 * a2, a1 * b2)
        return None
    if op == "/":
        if b2 == 0.0 and a2 != 0.0:
            return (a1 / a2, b1 / a2)
        return None
    # min/max stay affine only when both sides are constant in t
    if b1 == 0.0 and b2 == 0.0:
        return ((min if op == "min" else max)(a1, a2), 0.0)
    return None


def _affine_atoms(formula: A.Formula, x0, rates):
    """Affine (a, b) difference per comparison atom, or None if any is nonlinear."""
    atoms: list[tuple[float, float]] = []

    def walk(f: A.Formula) -> bool:
        if isinstance(f, A.BoolLit):
            return True
        if isinstance(f, A.Compare):
            lhs = _affine_term(f.lhs, x0, rates)
            rhs = _affine_term(f.rhs, x0, rates)
            if lhs is None or rhs is None:
                return False
            atoms.append((lhs[0] - rhs[0], lhs[1] - rhs[1]))
            return True
        if isinstance(f, A.Not):
            return walk(f.body)
        if isinstance(f, (A.And, A.Or, A.Implies)):
            return walk(f.lhs) and walk(f.rhs)
        return False

    return atoms if walk(formula) else None
