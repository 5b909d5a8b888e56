"""Bounded checker tests: verdicts, determinism, replay certification."""

import dataclasses
import json

import pytest

from hybridflow.checker import (
    VERDICT_COUNTEREXAMPLE,
    VERDICT_NO_VIOLATION,
    VERDICT_NO_WITNESS,
    VERDICT_WITNESS,
    CheckOptions,
    check_box,
    check_diamond,
    replay,
)
from hybridflow.corpus import builtin_model_source, load_builtin_model
from hybridflow.dsl import parse_formula, parse_model
from hybridflow.errors import UnsupportedFormulaError
from hybridflow.trace import trace_from_json_dict, trace_to_json_dict

FAST = CheckOptions(loop_bound=2, grid_points=3, duration_samples=3, init_samples=2)


def _model_with_safety(source: str, new_safety: str):
    idx = source.rindex("safety:")
    return parse_model(source[:idx] + "safety:\n  " + new_safety + "\n")


def mutated_linear_signal_source() -> str:
    """The builtin linear-signal model minus the k2 domain conjunct,
    with the outflow interval widened: an empty lane can now drain."""
    src = builtin_model_source("linear-signal")
    out = src.replace("& k1>=0 & k2>=0}", "& k1>=0}")
    assert out != src
    out2 = out.replace("g2 init [0, 0.5)", "g2 init [0, 0.6)").replace(
        "g2max in [0.5, 0.5]", "g2max in [0.6, 0.6]"
    )
    assert out2 != out
    return out2.replace("model: linear-signal", "model: linear-signal-mutated")


class TestCheckBox:
    def test_linear_signal_safe_at_desk_scale(self):
        report = check_box(load_builtin_model("linear-signal"), FAST)
        assert report.verdict == VERDICT_NO_VIOLATION
        assert report.counterexample is None
        assert report.stats.states_explored > 0

    def test_initial_state_violation_gives_zero_length_trace(self):
        model = _model_with_safety(builtin_model_source("linear-signal"), "k1>0")
        report = check_box(model, FAST)
        assert report.verdict == VERDICT_COUNTEREXAMPLE
        trace = report.counterexample
        assert trace.events == ()  # the initial sample k1=0 already violates
        assert trace.initial["k1"] == 0.0
        assert replay(trace, model, report.options, claim=parse_formula("k1>0")) is True

    def test_merge_conservation_holds_as_invariant(self):
        # the checker re-verifies Eq.-style conservation through the DSL path
        model = _model_with_safety(builtin_model_source("merge"), "g1+g2=f3")
        report = check_box(model, CheckOptions(loop_bound=2, grid_points=5,
                                               duration_samples=4, init_samples=3))
        assert report.verdict == VERDICT_NO_VIOLATION

    def test_quantified_safety_rejected(self):
        model = _model_with_safety(builtin_model_source("linear-signal"), "forall k1 k1>=0")
        with pytest.raises(UnsupportedFormulaError):
            check_box(model, FAST)

    def test_exploration_count_matches_closed_form(self):
        # two-way choice then one random assignment, no tests: 2 * grid_points
        src = (
            "model: count-product\n"
            "constants:\n"
            "variables:\n"
            "  x init [0, 0]\n"
            "  y init [0, 1]\n"
            "program:\n"
            "  {x:=0.125 ++ x:=0.375}; y:=*\n"
            "safety:\n"
            "  x>=0 & y>=0\n"
        )
        model = parse_model(src)
        opts = CheckOptions(loop_bound=1, grid_points=9, duration_samples=8, init_samples=1)
        report = check_box(model, opts)
        assert report.verdict == VERDICT_NO_VIOLATION
        assert report.stats.states_explored == 2 * opts.grid_points
        assert report.stats.flows_integrated == 0


class TestMutationFalsification:
    def test_counterexample_found_and_certified(self):
        model = parse_model(mutated_linear_signal_source())
        report = check_box(model, CheckOptions())
        assert report.verdict == VERDICT_COUNTEREXAMPLE
        trace = report.counterexample
        assert trace.final["k2"] < 0.0
        assert replay(trace, model, report.options) is True

    def test_counterexample_survives_json_round_trip(self):
        model = parse_model(mutated_linear_signal_source())
        report = check_box(model, FAST)
        assert report.verdict == VERDICT_COUNTEREXAMPLE
        round_tripped = trace_from_json_dict(json.loads(json.dumps(trace_to_json_dict(report.counterexample))))
        assert replay(round_tripped, model, report.options) is True

    def test_tampered_trace_rejected(self):
        model = parse_model(mutated_linear_signal_source())
        report = check_box(model, FAST)
        trace = report.counterexample
        bad_final = dict(trace.final)
        bad_final["k2"] += 1e-3
        assert replay(dataclasses.replace(trace, final=bad_final), model, report.options) is False

    def test_monotone_in_loop_bound(self):
        # found at bound 1, the same counterexample appears at every larger bound
        model = parse_model(mutated_linear_signal_source())
        reports = [
            check_box(model, dataclasses.replace(FAST, loop_bound=b)) for b in (1, 2, 3)
        ]
        assert all(r.verdict == VERDICT_COUNTEREXAMPLE for r in reports)
        first = trace_to_json_dict(reports[0].counterexample)
        assert all(trace_to_json_dict(r.counterexample) == first for r in reports[1:])


class TestDepthAndOrder:
    def test_violation_reachable_only_by_loop_composition(self):
        # each iteration adds 0.3; the bound 0.5 is crossed mid-flow of
        # iteration two, so loop_bound=1 is clean and loop_bound=2 is not
        src = (
            "model: ratchet\n"
            "constants:\n"
            "variables:\n"
            "  k init [0, 0]\n"
            "program:\n"
            "  {{k'=0.3}}*\n"
            "safety:\n"
            "  k<=0.5\n"
        )
        model = parse_model(src)
        opts = CheckOptions(loop_bound=1, grid_points=3, duration_samples=3, init_samples=1)
        assert check_box(model, opts).verdict == VERDICT_NO_VIOLATION
        report = check_box(model, dataclasses.replace(opts, loop_bound=2))
        assert report.verdict == VERDICT_COUNTEREXAMPLE
        assert report.counterexample.final["k"] > 0.5
        assert replay(report.counterexample, model, report.options) is True

    def test_first_counterexample_is_lowest_grid_point(self):
        # grids ascend, so the reported witness is the smallest violating pick
        src = (
            "model: ordered\n"
            "constants:\n"
            "variables:\n"
            "  x init [0, 1]\n"
            "program:\n"
            "  x:=*\n"
            "safety:\n"
            "  x<0.3\n"
        )
        model = parse_model(src)
        report = check_box(model, CheckOptions(loop_bound=1, grid_points=9,
                                               duration_samples=2, init_samples=1))
        assert report.verdict == VERDICT_COUNTEREXAMPLE
        # 9-point grid over [0, 1]: first value >= 0.3 is 0.375
        assert report.counterexample.final["x"] == 0.375

    def test_safety_over_dead_variable_still_sampled(self):
        # f is overwritten before any program read, but the safety formula
        # observes its initial value, so the initial grid must cover it
        src = (
            "model: observed\n"
            "constants:\n"
            "variables:\n"
            "  f init [0, 1]\n"
            "program:\n"
            "  {f:=0}*\n"
            "safety:\n"
            "  f<0.9\n"
        )
        model = parse_model(src)
        report = check_box(model, CheckOptions(loop_bound=1, grid_points=3,
                                               duration_samples=2, init_samples=3))
        assert report.verdict == VERDICT_COUNTEREXAMPLE
        assert report.counterexample.final["f"] == 1.0
        assert report.counterexample.events == ()


class TestDeterminism:
    def test_reports_are_byte_identical(self):
        model = load_builtin_model("linear-signal")
        assert check_box(model, FAST).to_json() == check_box(model, FAST).to_json()

    def test_worker_count_does_not_change_the_report(self, monkeypatch):
        model = load_builtin_model("linear-signal")
        baseline = check_box(model, FAST).to_json()
        monkeypatch.setenv("HYBRIDFLOW_THREADS", "4")
        assert check_box(model, FAST).to_json() == baseline

    def test_counterexample_deterministic_under_threads(self, monkeypatch):
        model = parse_model(mutated_linear_signal_source())
        baseline = check_box(model, FAST).to_json()
        monkeypatch.setenv("HYBRIDFLOW_THREADS", "4")
        assert check_box(model, FAST).to_json() == baseline


class TestCheckDiamond:
    def test_growth_witness(self):
        # green signal plus zero outflow grows the downstream lane
        model = load_builtin_model("linear-signal")
        report = check_diamond(model, parse_formula("k2>0.45"),
                               CheckOptions(loop_bound=2, grid_points=3,
                                            duration_samples=3, init_samples=3))
        assert report.verdict == VERDICT_WITNESS
        trace = report.counterexample
        assert trace.final["k2"] > 0.45
        assert replay(trace, model, report.options,
                      claim=parse_formula("k2>0.45"), claim_holds=True) is True

    def test_false_target_has_no_witness(self):
        model = load_builtin_model("linear-signal")
        report = check_diamond(model, parse_formula("false"), FAST)
        assert report.verdict == VERDICT_NO_WITNESS
        assert report.counterexample is None

    def test_initial_constraint_gives_zero_length_witness(self):
        model = load_builtin_model("linear-signal")
        report = check_diamond(model, parse_formula("k1>=0 & k2>=0"), FAST)
        assert report.verdict == VERDICT_WITNESS
        assert report.counterexample.events == ()

    def test_quantified_target_rejected(self):
        model = load_builtin_model("linear-signal")
        with pytest.raises(UnsupportedFormulaError):
            check_diamond(model, parse_formula("exists q q>0"), FAST)

    def test_undeclared_target_variable_rejected(self):
        from hybridflow.errors import SemanticError

        model = load_builtin_model("linear-signal")
        with pytest.raises(SemanticError, match="k9"):
            check_diamond(model, parse_formula("k9>0"), FAST)


class TestReportShape:
    def test_json_report_fields(self):
        report = check_box(load_builtin_model("linear-signal"), FAST)
        data = report.to_json_dict()
        assert data["schema"] == "hybridflow-report/1"
        assert data["verdict"] == VERDICT_NO_VIOLATION
        assert data["options"]["loop_bound"] == FAST.loop_bound
        assert "not a proof" in data["note"]
        assert data["counterexample"] is None
        assert data["trace_csv"] is None

    def test_counterexample_embeds_csv(self):
        model = parse_model(mutated_linear_signal_source())
        data = check_box(model, FAST).to_json_dict()
        assert data["trace_csv"].startswith("t,")
        assert data["counterexample"]["schema"] == "hybridflow-trace/1"

    def test_wall_time_not_serialized(self):
        report = check_box(load_builtin_model("linear-signal"), FAST)
        assert report.wall_time_s > 0
        assert "wall" not in json.dumps(report.to_json_dict())

    def test_options_validation(self):
        with pytest.raises(ValueError):
            CheckOptions(loop_bound=0)
        with pytest.raises(ValueError):
            CheckOptions(step=0.0)
