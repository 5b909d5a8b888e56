"""FastAPI service exposing parse/simulate/check/replay over HTTP.

The handler functions hold all request/response logic; the routes are thin
wrappers, and the CLI calls the same handlers in-process, so both clients
see identical behavior and identical serialized reports.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..checker import CheckOptions, check_box, check_diamond, replay
from ..corpus import BUILTIN_MODELS, builtin_model_source
from ..dsl import ModelFile, parse_formula, parse_model, pretty_print
from ..errors import HybridflowError, ParseError
from ..simulate import simulate_model
from ..trace import trace_from_json_dict, trace_to_csv, trace_to_json_dict
from .schemas import (
    CheckOptionsModel,
    CheckRequest,
    CheckResponse,
    DeclInfo,
    DiamondRequest,
    ErrorDetail,
    HealthResponse,
    ModelInfo,
    ModelRef,
    ParseRequest,
    ParseResponse,
    ReplayRequest,
    ReplayResponse,
    SimulateRequest,
    SimulateResponse,
)

__all__ = [
    "app",
    "resolve_model",
    "handle_parse",
    "handle_check",
    "handle_check_diamond",
    "handle_simulate",
    "handle_replay",
    "handle_models",
]


def resolve_model(ref: ModelRef) -> ModelFile:
    if ref.model is not None:
        if ref.model not in BUILTIN_MODELS:
            raise HybridflowError(
                f"unknown builtin model {ref.model!r}; available: {', '.join(BUILTIN_MODELS)}"
            )
        return parse_model(builtin_model_source(ref.model))
    return parse_model(ref.source or "")


def _options(model: CheckOptionsModel) -> CheckOptions:
    return CheckOptions(**model.model_dump())


def handle_parse(req: ParseRequest) -> ParseResponse:
    parsed = resolve_model(req)
    return ParseResponse(
        name=parsed.name,
        constants=[DeclInfo(name=c.name, interval=str(c.bounds)) for c in parsed.constants],
        variables=[DeclInfo(name=v.name, interval=str(v.init)) for v in parsed.variables],
        program=pretty_print(parsed.program),
        safety=pretty_print(parsed.safety),
    )


def handle_check(req: CheckRequest) -> CheckResponse:
    parsed = resolve_model(req)
    report = check_box(parsed, _options(req.options))
    return CheckResponse(
        verdict=report.verdict,
        holds_at_bound=report.holds_at_bound,
        report=report.to_json_dict(),
    )


def handle_check_diamond(req: DiamondRequest) -> CheckResponse:
    parsed = resolve_model(req)
    target = parse_formula(req.target)
    report = check_diamond(parsed, target, _options(req.options))
    return CheckResponse(
        verdict=report.verdict,
        holds_at_bound=report.holds_at_bound,
        report=report.to_json_dict(),
    )


def handle_simulate(req: SimulateRequest) -> SimulateResponse:
    parsed = resolve_model(req)
    trace = simulate_model(
        parsed,
        pins=req.pins,
        initial=req.initial,
        loop_bound=req.loop_bound,
        horizon=req.horizon,
        step=req.step,
        duration_samples=req.duration_samples,
    )
    return SimulateResponse(trace=trace_to_json_dict(trace), csv=trace_to_csv(trace))


def handle_replay(req: ReplayRequest) -> ReplayResponse:
    parsed = resolve_model(req)
    report = req.report
    trace_data = report.get("counterexample")
    if trace_data is None:
        raise HybridflowError("report contains no counterexample trace to replay")
    trace = trace_from_json_dict(trace_data)
    raw_options = report.get("options", {})
    if not isinstance(raw_options, dict):
        raise HybridflowError("report options must be an object")
    try:
        options = CheckOptions(**{k: v for k, v in raw_options.items()
                                  if k in CheckOptionsModel.model_fields})
    except (TypeError, ValueError) as exc:
        raise HybridflowError(f"report carries invalid options: {exc}") from exc
    if report.get("mode") == "diamond":
        claim = parse_formula(report["target"])
        certified = replay(trace, parsed, options, claim=claim, claim_holds=True)
    else:
        certified = replay(trace, parsed, options)
    return ReplayResponse(certified=certified, verdict=str(report.get("verdict")))


def handle_models() -> "list[ModelInfo]":
    return [ModelInfo(name=name, source=builtin_model_source(name)) for name in BUILTIN_MODELS]


# ---------------------------------------------------------------- FastAPI app

app = FastAPI(
    title="hybridflow",
    version=__version__,
    description=(
        "Macroscopic traffic junctions as hybrid programs: simulation and "
        "bounded safety checking. Counterexamples are definitive; a "
        "NoViolationAtBound verdict covers only the sampled runs and is not a proof."
    ),
)


def _http_error(exc: HybridflowError) -> HTTPException:
    detail = ErrorDetail(error=type(exc).__name__, message=str(exc))
    if isinstance(exc, ParseError):
        detail.line = exc.line
        detail.col = exc.col
    return HTTPException(status_code=422, detail=detail.model_dump())


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/models", response_model=list[ModelInfo])
def list_models() -> "list[ModelInfo]":
    return handle_models()


@app.get("/models/{name}", response_model=ModelInfo)
def get_model(name: str) -> ModelInfo:
    if name not in BUILTIN_MODELS:
        raise HTTPException(status_code=404, detail=f"unknown builtin model {name!r}")
    return ModelInfo(name=name, source=builtin_model_source(name))


@app.post("/parse", response_model=ParseResponse)
def parse_endpoint(req: ParseRequest) -> ParseResponse:
    try:
        return handle_parse(req)
    except HybridflowError as exc:
        raise _http_error(exc) from exc


@app.post("/check", response_model=CheckResponse)
def check_endpoint(req: CheckRequest) -> CheckResponse:
    try:
        return handle_check(req)
    except HybridflowError as exc:
        raise _http_error(exc) from exc


@app.post("/check-diamond", response_model=CheckResponse)
def check_diamond_endpoint(req: DiamondRequest) -> CheckResponse:
    try:
        return handle_check_diamond(req)
    except HybridflowError as exc:
        raise _http_error(exc) from exc


@app.post("/simulate", response_model=SimulateResponse)
def simulate_endpoint(req: SimulateRequest) -> SimulateResponse:
    try:
        return handle_simulate(req)
    except HybridflowError as exc:
        raise _http_error(exc) from exc


@app.post("/replay", response_model=ReplayResponse)
def replay_endpoint(req: ReplayRequest) -> ReplayResponse:
    try:
        return handle_replay(req)
    except HybridflowError as exc:
        raise _http_error(exc) from exc
