"""hybridflow: macroscopic traffic junctions as hybrid programs.

Triangular fundamental-diagram flux laws, a small DSL for hybrid programs
(discrete control plus ODE flows with evolution domains), a numeric
transition semantics, and a bounded falsifier for Box/Diamond safety
properties. The checker samples a finite set of runs: counterexamples are
definitive and replayable, absence of a violation at a bound is not a proof.
"""

from .checker import (
    CheckOptions,
    CheckReport,
    CheckStats,
    check_box,
    check_diamond,
    replay,
)
from .corpus import builtin_model_names, builtin_model_source, load_builtin_model
from .fundamental_diagram import LinkParams, demand, flow, make_params, supply
from .integrator import FlowSegment, integrate_flow
from .junction_dynamics import (
    MergeCapacities,
    SignalPhase,
    StopState,
    TurnRatios,
    diverge_flux,
    linear_flux,
    link_density_rate,
    merge_flux,
    signal_factor,
    stop_factor,
)
from .semantics import DiscreteStep, eval_formula, eval_term, successors_discrete
from .trace import Trace, trace_from_json_dict, trace_to_csv, trace_to_json_dict

__version__ = "0.1.0"

__all__ = [
    "CheckOptions", "CheckReport", "CheckStats", "check_box", "check_diamond", "replay",
    "builtin_model_names", "builtin_model_source", "load_builtin_model",
    "LinkParams", "make_params", "flow", "demand", "supply",
    "FlowSegment", "integrate_flow",
    "SignalPhase", "StopState", "TurnRatios", "MergeCapacities",
    "signal_factor", "stop_factor", "linear_flux", "diverge_flux", "merge_flux",
    "link_density_rate",
    "DiscreteStep", "eval_term", "eval_formula", "successors_discrete",
    "Trace", "trace_to_csv", "trace_to_json_dict", "trace_from_json_dict",
    "__version__",
]
