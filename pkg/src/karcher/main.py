"""Command-line entry point: ``karcher <command> [flags]``."""

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import structlog
from pydantic import BaseModel, ValidationError

from karcher import __version__
from karcher.config import DEFAULT_FLOW_TOL, DEFAULT_MAX_DIM, DEFAULT_THREADS, get_settings
from karcher.exceptions import (
    ConstructionError,
    ConvergenceError,
    DimensionMismatchError,
    MalformedInputError,
    RowFailedError,
)
from karcher.logging_config import configure_logging
from karcher.models.flow import FlowResult
from karcher.models.law import SpdLaw
from karcher.models.matrix import SpdMatrix
from karcher.models.measure import DiscreteMeasure
from karcher.schemas import (
    FailureResponse,
    FlowResultSchema,
    MatrixSchema,
    MeanResponse,
    MeasureSchema,
    SolveReport,
    SolverConfig,
    WassersteinResponse,
)
from karcher.services import check_service, flow_service, lln_service, mean_service
from karcher.services.measure_service import w1

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_INPUT = 2


def _read_json(path: str) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedInputError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}"
        ) from exc


def _check_dim(n: int, args: argparse.Namespace) -> None:
    if n > args.max_dim:
        raise MalformedInputError(f"dimension {n} exceeds --max-dim {args.max_dim}")


def _load_matrix(path: str, args: argparse.Namespace) -> SpdMatrix:
    schema = MatrixSchema.model_validate(_read_json(path))
    _check_dim(schema.n, args)
    return schema.to_spd()


def _load_measure(path: str, args: argparse.Namespace) -> DiscreteMeasure:
    schema = MeasureSchema.model_validate(_read_json(path))
    for atom in schema.atoms:
        _check_dim(atom.n, args)
    return schema.to_measure()


def _solver_config(args: argparse.Namespace, *, override_tol: bool = True) -> SolverConfig:
    cfg = SolverConfig.model_validate(_read_json(args.config)) if args.config else SolverConfig()
    if override_tol and args.tol is not None:
        cfg = cfg.model_copy(update={"tol": args.tol})
    return cfg


def _emit(model: BaseModel) -> None:
    sys.stdout.write(model.model_dump_json() + "\n")


def _mean_response(state: SpdMatrix, report: SolveReport | None = None) -> MeanResponse:
    return MeanResponse(matrix=MatrixSchema.from_model(state), report=report)


# Commands


def cmd_mean(args: argparse.Namespace) -> int:
    mu = _load_measure(args.measure, args)
    start = _load_matrix(args.start, args) if args.start else None
    state, report = mean_service.karcher_mean(mu, _solver_config(args), start=start)
    _emit(_mean_response(state, report))
    return EXIT_OK


def cmd_power_mean(args: argparse.Namespace) -> int:
    mu = _load_measure(args.measure, args)
    state, report = mean_service.power_mean(mu, args.t, _solver_config(args))
    _emit(_mean_response(state, report))
    return EXIT_OK


def cmd_resolvent(args: argparse.Namespace) -> int:
    mu = _load_measure(args.measure, args)
    x = _load_matrix(args.x, args)
    mixture = mean_service.resolvent_measure(mu, args.lam, x)
    state, report = mean_service.karcher_mean(mixture, _solver_config(args), start=x)
    _emit(_mean_response(state, report))
    return EXIT_OK


def cmd_flow(args: argparse.Namespace) -> int:
    mu = _load_measure(args.measure, args)
    x = _load_matrix(args.x, args)
    tol = args.tol if args.tol is not None else DEFAULT_FLOW_TOL
    if args.rho is not None:
        f = flow_service.trotter_map(mu.atoms, args.rho, weights=mu.weights)
        result = flow_service.approx_semigroup(f, args.t, x, tol)
    else:
        cfg = _solver_config(args, override_tol=False)
        result = flow_service.semigroup(mu, args.t, x, tol, cfg)
    _emit(FlowResultSchema.from_model(result))
    return EXIT_OK


def cmd_trotter(args: argparse.Namespace) -> int:
    mu = _load_measure(args.measure, args)
    x = _load_matrix(args.x, args)
    state = flow_service.trotter_product(
        mu.atoms, args.t, args.m, x, order=args.order, weights=mu.weights
    )
    _emit(_mean_response(state))
    return EXIT_OK


def cmd_wasserstein(args: argparse.Namespace) -> int:
    value, coupling = w1(_load_measure(args.mu, args), _load_measure(args.nu, args))
    _emit(WassersteinResponse(value=value, plan=coupling.plan.tolist()))
    return EXIT_OK


def _parse_ints(raw: str, flag: str) -> list[int]:
    try:
        return [int(part) for part in raw.split(",") if part.strip()]
    except ValueError as exc:
        raise MalformedInputError(f"{flag} must be comma-separated integers, got {raw!r}") from exc


def cmd_lln(args: argparse.Namespace) -> int:
    if args.law == "finite":
        if not args.measure:
            raise MalformedInputError("--law finite needs --measure")
        law = SpdLaw.finite(_load_measure(args.measure, args))
    else:
        if not args.base or args.scale is None:
            raise MalformedInputError("--law log-gaussian needs --base and --scale")
        law = SpdLaw.log_gaussian(_load_matrix(args.base, args), args.scale)

    sizes = _parse_ints(args.sizes, "--sizes")
    x = _load_matrix(args.x, args) if args.x else SpdMatrix.identity(law.dim)
    rows = lln_service.lln_run(
        law,
        sizes,
        args.t,
        x,
        args.seed,
        _solver_config(args),
        flow_tol=args.flow_tol,
        threads=args.threads,
        stratified=args.stratified,
    )
    header = {
        "kind": law.kind,
        "reference_size": lln_service.reference_size(law, sizes) if sizes else 0,
        "t": float(args.t),
        "seed": args.seed,
    }
    sys.stdout.write(lln_service.format_csv(rows, header))
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    only = [a for a in args.only.split(",") if a] if args.only else None
    summary = check_service.run_checks(
        instances=args.instances,
        seed=args.seed,
        threads=args.threads,
        only=only,
        dims=_parse_ints(args.dims, "--dims"),
    )
    _emit(summary)
    return EXIT_OK if summary.failed == 0 else EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="Solver tolerance")
    common.add_argument("--seed", type=int, default=settings.seed, help="Experiment seed")
    common.add_argument("--threads", type=int, default=DEFAULT_THREADS)
    common.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM, dest="max_dim")
    common.add_argument("--config", help="SolverConfig JSON file")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging on stderr")

    parser = argparse.ArgumentParser(
        prog="karcher",
        description="Karcher means, resolvents and flows on the SPD cone.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mean", parents=[common], help="Karcher mean of a measure")
    p.add_argument("--measure", required=True)
    p.add_argument("--start", help="Warm start matrix file")
    p.set_defaults(handler=cmd_mean)

    p = sub.add_parser("power-mean", parents=[common], help="Power mean P_t")
    p.add_argument("--measure", required=True)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(handler=cmd_power_mean)

    p = sub.add_parser("resolvent", parents=[common], help="Resolvent J_λ(X)")
    p.add_argument("--measure", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--lambda", type=float, required=True, dest="lam")
    p.set_defaults(handler=cmd_resolvent)

    p = sub.add_parser("flow", parents=[common], help="Semigroup S(t)X with error bound")
    p.add_argument("--measure", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--rho", type=float, help="Approximating semigroup of the Trotter map F_ρ")
    p.set_defaults(handler=cmd_flow)

    p = sub.add_parser("trotter", parents=[common], help="Trotter product (F_{t/m})^m X")
    p.add_argument("--measure", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--order", choices=["forward", "reverse"], default="forward")
    p.set_defaults(handler=cmd_trotter)

    p = sub.add_parser("wasserstein", parents=[common], help="W₁ distance and coupling")
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.set_defaults(handler=cmd_wasserstein)

    p = sub.add_parser("lln", parents=[common], help="Law-of-large-numbers CSV table")
    p.add_argument("--law", choices=["finite", "log-gaussian"], default="finite")
    p.add_argument("--measure", help="Finite law")
    p.add_argument("--base", help="Base point of the log-Gaussian law")
    p.add_argument("--scale", type=float)
    p.add_argument("--sizes", default="1,2,4,8,16,32,64")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--x", help="Flow starting point (identity by default)")
    p.add_argument("--flow-tol", type=float, default=1e-6, dest="flow_tol")
    p.add_argument("--stratified", action="store_true")
    p.set_defaults(handler=cmd_lln)

    p = sub.add_parser("check", parents=[common], help="Run the invariant suite")
    p.add_argument("--instances", type=int, default=check_service.DEFAULT_INSTANCES)
    p.add_argument("--dims", default=",".join(map(str, check_service.DEFAULT_DIMS)))
    p.add_argument("--only", help="Comma-separated check anchors")
    p.set_defaults(handler=cmd_check)

    return parser


def _failure_report(exc: ConvergenceError) -> SolveReport | dict | None:
    if isinstance(exc.report, SolveReport):
        return exc.report
    if isinstance(exc.report, FlowResult):
        return FlowResultSchema.from_model(exc.report).model_dump()
    return None


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    configure_logging("debug" if args.verbose else settings.log_level, settings.log_json)
    logger.info("command_start", command=args.command)

    try:
        return args.handler(args)
    except ConvergenceError as exc:
        logger.error("solver_failed", command=args.command, error=str(exc))
        _emit(FailureResponse(error=str(exc), report=_failure_report(exc)))
        return EXIT_SOLVER
    except RowFailedError as exc:
        logger.error("lln_failed", row_index=exc.row_index, error=str(exc.cause))
        report = _failure_report(exc.cause) if isinstance(exc.cause, ConvergenceError) else None
        _emit(FailureResponse(error=str(exc), report=report))
        return EXIT_SOLVER
    except ValidationError as exc:
        sys.stderr.write(f"karcher: invalid input: {exc}\n")
        return EXIT_INPUT
    except (MalformedInputError, ConstructionError, DimensionMismatchError, ValueError) as exc:
        sys.stderr.write(f"karcher: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
