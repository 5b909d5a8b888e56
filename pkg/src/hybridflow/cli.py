"""Command-line front end.

A thin client of the service layer: every subcommand builds the same request
models the HTTP API takes and calls the same handlers, in-process by default
or against a running server with --server. Reports print byte-identically
across runs and worker counts.

Exit codes: 0 = NoViolationAtBound / WitnessFound / success,
1 = CounterexampleFound / NoWitnessAtBound / not certified, 2 = error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import urllib.error
import urllib.request

from . import __version__
from .corpus import BUILTIN_MODELS, builtin_model_source
from .errors import HybridflowError
from .service import schemas
from .service.app import (
    handle_check,
    handle_check_diamond,
    handle_parse,
    handle_replay,
    handle_simulate,
)

NOT_A_PROOF_EPILOG = (
    "hybridflow is a bounded falsifier, not a prover: counterexamples are "
    "definitive and replayable, but a clean verdict only covers the sampled "
    "runs at the given bounds."
)

_PIN_FLAGS = ("pi", "f1", "g2", "psi", "xi1")


def _add_model_arg(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--model",
        required=True,
        help=f"builtin model name ({', '.join(BUILTIN_MODELS)}) or path to an .hpm file",
    )


def _add_output_args(sub: argparse.ArgumentParser, formats=("json", "csv")) -> None:
    sub.add_argument("--format", choices=formats, default="json", help="output format")
    sub.add_argument("--out", help="write output to this path instead of stdout")
    sub.add_argument("-v", "--verbose", action="store_true",
                     help="print a summary to stderr (stdout stays byte-stable)")


def _add_check_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--loop-bound", type=int, default=3, help="max loop unrollings")
    sub.add_argument("--grid-points", type=int, default=9, help="samples per random assignment")
    sub.add_argument("--duration-samples", type=int, default=8, help="stop-time samples per flow")
    sub.add_argument("--step", type=float, default=1e-3, help="integrator step size")
    sub.add_argument("--horizon", type=float, default=1.0, help="max duration per flow")
    sub.add_argument("--init-samples", type=int, default=3, help="samples per initial dimension")
    sub.add_argument("--event-tol", type=float, default=1e-9, help="domain-exit refinement tolerance")
    sub.add_argument("--seed", type=int, default=None, help="reserved; exploration is deterministic")


def _add_server_arg(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--server", help="base URL of a running hybridflow service (default: in-process)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridflow",
        description="Traffic junctions as hybrid programs: parse, simulate, bounded-check.",
        epilog=NOT_A_PROOF_EPILOG,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and validate a model file",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_model_arg(p)
    _add_output_args(p, formats=("json",))
    _add_server_arg(p)

    p = sub.add_parser("simulate", help="run one deterministic trace with pinned choices",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_model_arg(p)
    for flag in _PIN_FLAGS:
        p.add_argument(f"--{flag}", type=float, default=None,
                       help=f"pin the model quantity {flag!r}")
    p.add_argument("--pin", action="append", default=[], metavar="NAME=VALUE",
                   help="pin any declared quantity (repeatable)")
    p.add_argument("--set", action="append", default=[], metavar="NAME=VALUE", dest="set_init",
                   help="override an initial value (repeatable)")
    p.add_argument("--loop-bound", type=int, default=1, help="loop iterations to run")
    p.add_argument("--horizon", type=float, default=1.0, help="max duration per flow")
    p.add_argument("--step", type=float, default=1e-3, help="integrator step size")
    p.add_argument("--duration-samples", type=int, default=8, help="sample rows per flow")
    _add_output_args(p)
    _add_server_arg(p)

    p = sub.add_parser("check", help="bounded check: all sampled runs satisfy the safety formula",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_model_arg(p)
    _add_check_args(p)
    _add_output_args(p, formats=("json",))
    _add_server_arg(p)

    p = sub.add_parser("check-diamond", help="bounded search: some sampled run reaches the target",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_model_arg(p)
    p.add_argument("--target", required=True, help="target formula, e.g. 'k2>0.45'")
    _add_check_args(p)
    _add_output_args(p, formats=("json",))
    _add_server_arg(p)

    p = sub.add_parser("models", help="print the builtin models' DSL source",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("name", nargs="?", help="print just this model")

    p = sub.add_parser("replay", help="re-execute and certify a report's counterexample trace",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_model_arg(p)
    p.add_argument("report", help="path to a check report JSON file")
    _add_server_arg(p)

    p = sub.add_parser("serve", help="run the HTTP service",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _model_ref(spec: str) -> dict:
    if spec in BUILTIN_MODELS:
        return {"model": spec, "source": None}
    with open(spec, "r", encoding="utf-8") as fh:
        return {"model": None, "source": fh.read()}


def _parse_kv(pairs: "list[str]", what: str) -> "dict[str, float]":
    out: dict[str, float] = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep:
            raise HybridflowError(f"{what} must look like NAME=VALUE, got {pair!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise HybridflowError(f"{what} value for {name!r} is not a number: {value!r}") from None
    return out


def _options_dict(args) -> dict:
    return {
        "loop_bound": args.loop_bound,
        "grid_points": args.grid_points,
        "duration_samples": args.duration_samples,
        "step": args.step,
        "horizon": args.horizon,
        "init_samples": args.init_samples,
        "event_tol": args.event_tol,
        "seed": args.seed,
    }


def _emit(text: str, out_path: "str | None") -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _post(server: str, path: str, payload: dict) -> dict:
    body = json.dumps(payload).encode("utf-8")
    req = urllib.request.Request(
        server.rstrip("/") + path, data=body, headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        detail = exc.read().decode("utf-8", errors="replace")
        raise HybridflowError(f"server returned {exc.code}: {detail}") from exc
    except urllib.error.URLError as exc:
        raise HybridflowError(f"cannot reach server {server!r}: {exc.reason}") from exc


def _cmd_parse(args) -> int:
    payload = {**_model_ref(args.model)}
    if args.server:
        data = _post(args.server, "/parse", payload)
    else:
        data = handle_parse(schemas.ParseRequest(**payload)).model_dump()
    if args.verbose:
        sys.stderr.write(
            f"{data['name']}: {len(data['constants'])} constant(s), "
            f"{len(data['variables'])} variable(s)\n"
        )
    _emit(json.dumps(data, indent=2), args.out)
    return 0


def _cmd_check(args, diamond: bool) -> int:
    payload = {**_model_ref(args.model), "options": _options_dict(args)}
    if diamond:
        payload["target"] = args.target
    started = time.perf_counter()
    if args.server:
        data = _post(args.server, "/check-diamond" if diamond else "/check", payload)
    else:
        if diamond:
            data = handle_check_diamond(schemas.DiamondRequest(**payload)).model_dump()
        else:
            data = handle_check(schemas.CheckRequest(**payload)).model_dump()
    if args.verbose:
        stats = data["report"]["stats"]
        sys.stderr.write(
            f"{data['report']['model']}: {data['verdict']} "
            f"(states={stats['states_explored']}, flows={stats['flows_integrated']}, "
            f"{time.perf_counter() - started:.2f}s)\n"
        )
    _emit(json.dumps(data["report"], indent=2), args.out)
    return 0 if data["holds_at_bound"] else 1


def _cmd_simulate(args) -> int:
    pins = _parse_kv(args.pin, "--pin")
    for flag in _PIN_FLAGS:
        value = getattr(args, flag)
        if value is not None:
            pins[flag] = value
    payload = {
        **_model_ref(args.model),
        "pins": pins,
        "initial": _parse_kv(args.set_init, "--set"),
        "loop_bound": args.loop_bound,
        "horizon": args.horizon,
        "step": args.step,
        "duration_samples": args.duration_samples,
    }
    if args.server:
        data = _post(args.server, "/simulate", payload)
    else:
        data = handle_simulate(schemas.SimulateRequest(**payload)).model_dump()
    if args.verbose:
        trace = data["trace"]
        sys.stderr.write(
            f"{trace['model']}: {len(trace['events'])} event(s), "
            f"final state {json.dumps(trace['final'])}\n"
        )
    if args.format == "csv":
        _emit(data["csv"], args.out)
    else:
        _emit(json.dumps(data["trace"], indent=2), args.out)
    return 0


def _cmd_models(args) -> int:
    if args.name:
        if args.name not in BUILTIN_MODELS:
            raise HybridflowError(
                f"unknown builtin model {args.name!r}; available: {', '.join(BUILTIN_MODELS)}"
            )
        sys.stdout.write(builtin_model_source(args.name))
        return 0
    for name in BUILTIN_MODELS:
        sys.stdout.write(f"# ===== {name} =====\n")
        sys.stdout.write(builtin_model_source(name))
        sys.stdout.write("\n")
    return 0


def _cmd_replay(args) -> int:
    with open(args.report, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    payload = {**_model_ref(args.model), "report": report}
    if args.server:
        data = _post(args.server, "/replay", payload)
    else:
        data = handle_replay(schemas.ReplayRequest(**payload)).model_dump()
    sys.stdout.write(json.dumps({"certified": data["certified"]}, indent=2) + "\n")
    return 0 if data["certified"] else 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    workers_note = os.environ.get("HYBRIDFLOW_THREADS")
    if workers_note:
        sys.stderr.write(f"checker worker cap: HYBRIDFLOW_THREADS={workers_note}\n")
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: "list[str] | None" = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "parse":
            return _cmd_parse(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "check":
            return _cmd_check(args, diamond=False)
        if args.command == "check-diamond":
            return _cmd_check(args, diamond=True)
        if args.command == "models":
            return _cmd_models(args)
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "serve":
            return _cmd_serve(args)
        parser.error(f"unknown command {args.command!r}")
    except HybridflowError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
