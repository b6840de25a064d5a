"""Command-line front end.

Subcommands: ``norm-table``, ``phase-transition``, ``noise-sweep``,
``recover``.  Exit codes: 0 on success, 2 on input errors, 3 on numerical
failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .dca import Method
from .errors import ContractViolation, NumericalError
from .harness import (
    ExperimentSpec,
    FixedLambda,
    KIND_NOISE_SWEEP,
    KIND_NORM_TABLE,
    KIND_PHASE_TRANSITION,
    MuMultiples,
    SolverSettings,
    run_noise_sweep,
    run_norm_table,
    run_phase_transition,
    run_single_recover,
)
from .spectral import Constraint

DEFAULT_SNR_LEVELS = "5,15,25,35,45,55"
DEFAULT_MU_FACTORS = "0.01,0.2,2.5,50"


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ContractViolation(f"expected comma-separated integers, got {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(math.inf if part.strip().lower() == "inf" else float(part)
                     for part in text.split(","))
    except ValueError:
        raise ContractViolation(f"expected comma-separated numbers, got {text!r}")


def _parse_m_values(text: str) -> tuple[int, ...]:
    """Measurement counts: a single value, a comma list, or start:step:stop."""
    if ":" in text:
        pieces = text.split(":")
        if len(pieces) != 3:
            raise ContractViolation(f"range must be start:step:stop, got {text!r}")
        try:
            start, step, stop = (int(p) for p in pieces)
        except ValueError:
            raise ContractViolation(f"range pieces must be integers, got {text!r}")
        if step <= 0 or stop < start:
            raise ContractViolation(f"range {text!r} is empty or descending")
        return tuple(range(start, stop + 1, step))
    return _parse_int_list(text)


def _parse_methods(text: str) -> tuple[Method, ...]:
    return tuple(Method.parse(part) for part in text.split(","))


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol", type=float, default=1e-2,
                        help="outer relative-change stopping tolerance")
    parser.add_argument("--max-outer", type=int, default=10,
                        help="outer iteration cap")
    parser.add_argument("--eps-abs", type=float, default=1e-7,
                        help="inner absolute residual tolerance")
    parser.add_argument("--eps-rel", type=float, default=1e-5,
                        help="inner relative residual tolerance")
    parser.add_argument("--max-inner", type=int, default=5000,
                        help="inner iteration cap")
    parser.add_argument("--constraint", default="complex",
                        choices=["complex", "real", "nonnegative"],
                        help="entry class of the lifted iterates")


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default="-", help="output path (default stdout)")
    parser.add_argument("--format", default="csv", choices=["csv", "json"],
                        help="table output format")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes for independent cells")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaseliftoff",
        description="Phase retrieval solvers and benchmark harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_norm = sub.add_parser("norm-table",
                            help="operator norms of Gaussian ensembles")
    p_norm.add_argument("--n", default="32,64,128",
                        help="signal dimensions (comma list)")
    p_norm.add_argument("--m", default=None,
                        help="override measurement count (default 4n)")
    p_norm.add_argument("--trials", type=int, default=10)
    p_norm.add_argument("--seed", type=int, default=0)
    _add_output_flags(p_norm)

    p_pt = sub.add_parser("phase-transition",
                          help="noiseless success rate vs measurement count")
    p_pt.add_argument("--n", default="32", help="signal dimension")
    p_pt.add_argument("--m", default="60:3:150",
                      help="measurement counts (value, comma list, or start:step:stop)")
    p_pt.add_argument("--trials", type=int, default=20)
    p_pt.add_argument("--seed", type=int, default=0)
    p_pt.add_argument("--methods", default="phaseliftoff,phaselift,logdet")
    p_pt.add_argument("--lambda", dest="lam", type=float, default=1e-4)
    _add_solver_flags(p_pt)
    _add_output_flags(p_pt)

    p_ns = sub.add_parser("noise-sweep",
                          help="reconstruction SNR vs input SNR")
    p_ns.add_argument("--n", default="32", help="signal dimension")
    p_ns.add_argument("--m", default=None,
                      help="measurement count (default 4n)")
    p_ns.add_argument("--trials", type=int, default=10)
    p_ns.add_argument("--seed", type=int, default=0)
    p_ns.add_argument("--methods", default="phaseliftoff")
    p_ns.add_argument("--snr", default=DEFAULT_SNR_LEVELS,
                      help="input SNR levels in dB (comma list, 'inf' allowed)")
    p_ns.add_argument("--lambda-mu-factors", default=DEFAULT_MU_FACTORS,
                      help="penalty multiples of the noise scale mu")
    _add_solver_flags(p_ns)
    _add_output_flags(p_ns)

    p_rec = sub.add_parser("recover", help="solve a single instance file")
    p_rec.add_argument("instance", help="instance JSON path")
    p_rec.add_argument("--method", default="phaseliftoff")
    p_rec.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="penalty weight (default 1e-4)")
    p_rec.add_argument("--lambda-mu-factors", default=None,
                       help="single multiple of mu (requires e_norm in the instance)")
    _add_solver_flags(p_rec)
    p_rec.add_argument("--out", default="-", help="report path (default stdout)")

    return parser


def _solver_settings(args: argparse.Namespace) -> SolverSettings:
    return SolverSettings(
        tol=args.tol,
        max_outer=args.max_outer,
        eps_abs=args.eps_abs,
        eps_rel=args.eps_rel,
        max_inner=args.max_inner,
        constraint=Constraint.parse(args.constraint),
    )


def _write_output(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fp:
            fp.write(text)


def _table_text(table, fmt: str) -> str:
    if fmt == "csv":
        return table.to_csv_text()
    return json.dumps(table.to_json_obj(), indent=1) + "\n"


def _run(args: argparse.Namespace) -> int:
    if args.command == "norm-table":
        spec = ExperimentSpec(
            kind=KIND_NORM_TABLE,
            n_values=_parse_int_list(args.n),
            m_values=_parse_m_values(args.m) if args.m else (),
            trials=args.trials,
            base_seed=args.seed,
            jobs=args.jobs,
        )
        _write_output(_table_text(run_norm_table(spec), args.format), args.out)
        return 0

    if args.command == "phase-transition":
        spec = ExperimentSpec(
            kind=KIND_PHASE_TRANSITION,
            n_values=_parse_int_list(args.n),
            m_values=_parse_m_values(args.m),
            trials=args.trials,
            base_seed=args.seed,
            methods=_parse_methods(args.methods),
            lambda_policy=FixedLambda(args.lam),
            solver=_solver_settings(args),
            jobs=args.jobs,
        )
        _write_output(_table_text(run_phase_transition(spec), args.format), args.out)
        return 0

    if args.command == "noise-sweep":
        n_values = _parse_int_list(args.n)
        spec = ExperimentSpec(
            kind=KIND_NOISE_SWEEP,
            n_values=n_values,
            m_values=_parse_m_values(args.m) if args.m else (),
            trials=args.trials,
            base_seed=args.seed,
            methods=_parse_methods(args.methods),
            lambda_policy=MuMultiples(_parse_float_list(args.lambda_mu_factors)),
            snr_levels_db=_parse_float_list(args.snr),
            solver=_solver_settings(args),
            jobs=args.jobs,
        )
        _write_output(_table_text(run_noise_sweep(spec), args.format), args.out)
        return 0

    if args.command == "recover":
        if args.lam is not None and args.lambda_mu_factors is not None:
            raise ContractViolation("--lambda and --lambda-mu-factors are exclusive")
        if args.lambda_mu_factors is not None:
            policy = MuMultiples(_parse_float_list(args.lambda_mu_factors))
        else:
            policy = FixedLambda(args.lam if args.lam is not None else 1e-4)
        report = run_single_recover(
            args.instance,
            method=Method.parse(args.method),
            constraint=Constraint.parse(args.constraint),
            lambda_policy=policy,
            solver=_solver_settings(args),
        )
        _write_output(json.dumps(report, indent=1) + "\n", args.out)
        return 0

    raise ContractViolation(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    """Programmatic entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _run(args)
    except (ContractViolation, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())
