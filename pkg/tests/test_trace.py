"""Trace serialization tests: CSV shape and JSON round-trips."""

import json

import pytest

from hybridflow.corpus import load_builtin_model
from hybridflow.errors import ReplayError
from hybridflow.simulate import SimulationError, simulate_model
from hybridflow.trace import trace_from_json_dict, trace_to_csv, trace_to_json_dict


def _pinned_trace():
    model = load_builtin_model("linear-signal")
    return simulate_model(
        model,
        pins={"pi": 0.0, "f1": 0.0, "g2": 0.25},
        initial={"k2": 0.4},
        loop_bound=1,
        horizon=1.0,
    )


class TestCsv:
    def test_header_and_column_order(self):
        trace = _pinned_trace()
        lines = trace_to_csv(trace).strip().splitlines()
        header = lines[0].split(",")
        assert header[0] == "t"
        assert tuple(header[1:]) == trace.variables

    def test_red_light_keeps_k1_flat_and_drains_k2(self):
        trace = _pinned_trace()
        lines = trace_to_csv(trace).strip().splitlines()
        header = lines[0].split(",")
        k1_col = header.index("k1")
        k2_col = header.index("k2")
        rows = [line.split(",") for line in lines[1:]]
        k1 = [float(r[k1_col]) for r in rows]
        k2 = [float(r[k2_col]) for r in rows]
        assert all(v == k1[0] for v in k1)
        assert all(b <= a for a, b in zip(k2, k2[1:]))  # weakly decreasing
        assert k2[-1] == pytest.approx(0.4 - 0.25 * 1.0, abs=1e-9)

    def test_times_are_nondecreasing(self):
        trace = _pinned_trace()
        lines = trace_to_csv(trace).strip().splitlines()[1:]
        times = [float(line.split(",", 1)[0]) for line in lines]
        assert times == sorted(times)


class TestJson:
    def test_round_trip_preserves_states_exactly(self):
        trace = _pinned_trace()
        data = json.loads(json.dumps(trace_to_json_dict(trace)))
        back = trace_from_json_dict(data)
        assert back.initial == trace.initial
        assert back.final == trace.final
        assert len(back.events) == len(trace.events)

    def test_schema_is_checked(self):
        trace = _pinned_trace()
        data = trace_to_json_dict(trace)
        data["schema"] = "something-else"
        with pytest.raises(ReplayError):
            trace_from_json_dict(data)

    def test_malformed_rejected(self):
        with pytest.raises(ReplayError):
            trace_from_json_dict({"schema": "hybridflow-trace/1"})


class TestSimulatePins:
    def test_missing_pin_is_an_error(self):
        model = load_builtin_model("linear-signal")
        with pytest.raises(SimulationError, match="g2"):
            simulate_model(model, pins={"pi": 0.0, "f1": 0.0})

    def test_unknown_pin_is_an_error(self):
        model = load_builtin_model("linear-signal")
        with pytest.raises(SimulationError, match="undeclared"):
            simulate_model(model, pins={"zz": 1.0})

    def test_pin_filters_choice_branches(self):
        model = load_builtin_model("linear-signal")
        trace = simulate_model(model, pins={"pi": 1.0, "f1": 0.25, "g2": 0.0})
        assert trace.final["pi"] == 1.0

    def test_pinned_constant_overrides_value(self):
        model = load_builtin_model("linear-busstop")
        trace = simulate_model(model, pins={"psi": 0.6, "f1": 0.0, "g2": 0.0, "P": 0.6})
        assert trace.initial["psi"] == 0.6
        assert trace.final["P"] == 0.6

    def test_two_iterations_accumulate_time(self):
        model = load_builtin_model("linear-signal")
        trace = simulate_model(model, pins={"pi": 0.0, "f1": 0.25, "g2": 0.0},
                               loop_bound=2, horizon=0.5)
        assert trace.duration() == pytest.approx(1.0, abs=1e-9)
        # red light, inflow only: k1 rises by f1/L1 per unit time
        assert trace.final["k1"] == pytest.approx(0.25, abs=1e-9)
