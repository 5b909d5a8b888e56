"""Execution traces: alternating discrete steps and sampled flows.

A trace fixes a variable order (declaration order) used for CSV columns and
state serialization. Serialized floats use repr's shortest round-trip form,
so JSON round-trips reproduce states bit-exactly and replay can compare with
plain equality.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import Union

from .errors import ReplayError
from .integrator import FlowSegment
from .semantics import DiscreteStep

__all__ = ["Trace", "TraceEvent", "trace_to_csv", "trace_to_json_dict", "trace_from_json_dict"]

TRACE_SCHEMA = "hybridflow-trace/1"

TraceEvent = Union[DiscreteStep, FlowSegment]


@dataclass(frozen=True)
class Trace:
    model: str
    variables: "tuple[str, ...]"
    initial: "dict[str, float]"
    events: "tuple[TraceEvent, ...]"
    final: "dict[str, float]"

    def duration(self) -> float:
        return sum(e.duration for e in self.events if isinstance(e, FlowSegment))


def _ordered(state: "dict[str, float]", variables: "tuple[str, ...]") -> "dict[str, float]":
    return {name: state[name] for name in variables}


def trace_to_csv(trace: Trace) -> str:
    """One row per sampled time point: t, then each declared name.

    Discrete steps emit a row at the current time; flow samples advance it.
    Tests change nothing and emit no row.
    """
    out = io.StringIO()
    out.write("t," + ",".join(trace.variables) + "\n")

    def row(t: float, state: "dict[str, float]") -> None:
        out.write(repr(t) + "," + ",".join(repr(state[v]) for v in trace.variables) + "\n")

    t = 0.0
    row(t, trace.initial)
    for event in trace.events:
        if isinstance(event, DiscreteStep):
            if event.kind != "test":
                row(t, event.post)
        else:
            for offset, state in event.samples:
                if offset == 0.0:
                    continue  # duplicates the current state
                row(t + offset, state)
            t += event.duration
    return out.getvalue()


def trace_to_json_dict(trace: Trace) -> dict:
    events = []
    for event in trace.events:
        if isinstance(event, DiscreteStep):
            entry: dict = {"type": event.kind, "node": event.node_id}
            if event.kind != "test":
                entry["post"] = _ordered(event.post, trace.variables)
            if event.value is not None:
                entry["value"] = event.value
            events.append(entry)
        else:
            events.append(
                {
                    "type": "flow",
                    "node": event.node_id,
                    "duration": event.duration,
                    "step": event.step,
                    "samples": [[t, _ordered(s, trace.variables)] for t, s in event.samples],
                }
            )
    return {
        "schema": TRACE_SCHEMA,
        "model": trace.model,
        "variables": list(trace.variables),
        "initial": _ordered(trace.initial, trace.variables),
        "events": events,
        "final": _ordered(trace.final, trace.variables),
    }


def trace_from_json_dict(data: dict) -> Trace:
    try:
        if data["schema"] != TRACE_SCHEMA:
            raise ReplayError(f"unsupported trace schema {data['schema']!r}")
        variables = tuple(data["variables"])
        events: list[TraceEvent] = []
        for entry in data["events"]:
            kind = entry["type"]
            if kind == "flow":
                events.append(
                    FlowSegment(
                        node_id=entry["node"],
                        start={},  # replay re-derives the start from the running state
                        end=dict(entry["samples"][-1][1]),
                        duration=float(entry["duration"]),
                        step=float(entry["step"]),
                        samples=tuple((float(t), dict(s)) for t, s in entry["samples"]),
                    )
                )
            elif kind in ("assign", "random_assign", "test"):
                events.append(
                    DiscreteStep(
                        node_id=entry["node"],
                        kind=kind,
                        post=dict(entry.get("post", {})),
                        value=entry.get("value"),
                    )
                )
            else:
                raise ReplayError(f"unknown trace event type {kind!r}")
        return Trace(
            model=data["model"],
            variables=variables,
            initial=dict(data["initial"]),
            events=tuple(events),
            final=dict(data["final"]),
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ReplayError(f"malformed trace: {exc}") from exc


def trace_to_json(trace: Trace, indent: "int | None" = 2) -> str:
    return json.dumps(trace_to_json_dict(trace), indent=indent)
