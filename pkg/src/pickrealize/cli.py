"""Command-line front end.

Subcommands: verify | reduce | lift | sos | realize | certify | batch.
All results go to stdout as deterministic JSON; diagnostics go to stderr.
Exit codes: 0 success/certified, 1 input error, 2 falsified (witness in the
JSON), 3 solver stalled / inconclusive.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import serialize
from .analysis import (
    CERTIFIED_CAYLEY_INNER,
    CERTIFIED_PICK_VIA_REALIZATION,
    FALSIFIED,
    INCONCLUSIVE,
    cayley_inner_criterion,
    check_cayley_symmetry,
    sample_pick,
)
from .errors import (
    InputFormatError,
    NotHermitianStructure,
    PickFalsified,
    PickRealizeError,
    SolverStalled,
)
from .lifting import lift
from .realization import certify, realize_pick, schur_to_pencil, schur_to_transfer
from .reduction import reduce_to_multi_affine
from .sos import sos_factor

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FALSIFIED = 2
EXIT_STALLED = 3


@dataclass
class RunConfig:
    tol: float = 1e-9
    samples: int = 200
    seed: int = 42
    max_iters: int = 20000
    mode: str = "exact"
    form: str = "schur"

    def __post_init__(self):
        if self.tol <= 0:
            raise InputFormatError("tol must be positive")
        if self.samples < 1:
            raise InputFormatError("samples must be at least 1")


def _config_from_args(args) -> RunConfig:
    seed = args.seed
    env_seed = os.environ.get("PICKREALIZE_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            raise InputFormatError(f"PICKREALIZE_SEED={env_seed!r} is not an integer")
    return RunConfig(tol=args.tol, samples=args.samples, seed=seed,
                     max_iters=args.max_iters, mode=args.mode,
                     form=getattr(args, "form", "schur"))


def _emit(payload: dict) -> None:
    sys.stdout.write(serialize.dumps(payload))


def _load_function(path: str, config: RunConfig):
    f = serialize.function_from_json(serialize.loads_file(path), where=path)
    if config.mode == "float":
        f = f.to_float()
    return f


def _verdict_json(verdict) -> dict:
    certs = None
    if verdict.certificates is not None:
        certs = [serialize.factor_to_json(c) for c in verdict.certificates]
    return {"status": verdict.status, "witness": verdict.witness,
            "certificates": certs, "report": verdict.report}


def cmd_verify(args) -> int:
    config = _config_from_args(args)
    f = _load_function(args.input, config)
    sampled = sample_pick(f, n_samples=config.samples, seed=config.seed, tol=config.tol)
    if sampled.status == FALSIFIED:
        _emit(_verdict_json(sampled))
        return EXIT_FALSIFIED
    symmetric, _ = check_cayley_symmetry(f)
    if symmetric:
        h0, _plan = reduce_to_multi_affine(f)
        verdict = cayley_inner_criterion(h0, seed=config.seed,
                                         max_iters=config.max_iters, tol=config.tol)
        _emit(_verdict_json(verdict))
        if verdict.status == FALSIFIED:
            return EXIT_FALSIFIED
        return EXIT_OK if verdict.status == CERTIFIED_CAYLEY_INNER else EXIT_STALLED
    try:
        r = realize_pick(f, seed=config.seed, samples=config.samples,
                         max_iters=config.max_iters)
    except PickFalsified as err:
        _emit({"status": FALSIFIED, "witness": err.witness,
               "certificates": None, "report": str(err)})
        return EXIT_FALSIFIED
    except SolverStalled as err:
        _emit({"status": INCONCLUSIVE, "witness": None,
               "certificates": None, "report": str(err)})
        return EXIT_STALLED
    report = certify(r, f, n_points=config.samples, seed=config.seed, tol=config.tol)
    status = CERTIFIED_PICK_VIA_REALIZATION if report.ok else INCONCLUSIVE
    _emit({"status": status, "witness": None, "certificates": None,
           "report": "membership certified by an explicit realization"
                     if report.ok else "realization found but certification failed",
           "certificate": report.to_json()})
    return EXIT_OK if report.ok else EXIT_STALLED


def cmd_reduce(args) -> int:
    config = _config_from_args(args)
    f = _load_function(args.input, config)
    reduced, plan = reduce_to_multi_affine(f)
    _emit({"function": serialize.function_to_json(reduced),
           "plan": serialize.plan_to_json(plan)})
    return EXIT_OK


def cmd_lift(args) -> int:
    config = _config_from_args(args)
    f = _load_function(args.input, config)
    result = lift(f)
    _emit(serialize.function_to_json(result.g))
    return EXIT_OK


def cmd_sos(args) -> int:
    config = _config_from_args(args)
    data = serialize.loads_file(args.input)
    W = serialize.poly_from_json(data, where=args.input)
    try:
        factor = sos_factor(W, max_iters=config.max_iters)
    except NotHermitianStructure as err:
        raise InputFormatError(str(err))
    except SolverStalled as err:
        _emit({"status": "SolverStalled", "report": str(err)})
        return EXIT_STALLED
    _emit(serialize.factor_to_json(factor))
    return EXIT_OK


def _realize_with_form(f, config: RunConfig):
    r = realize_pick(f, seed=config.seed, samples=config.samples,
                     max_iters=config.max_iters)
    if config.form == "schur":
        return r
    if config.form == "transfer":
        return schur_to_transfer(r)
    if config.form == "pencil":
        return schur_to_pencil(r)
    raise InputFormatError(f"unknown form {config.form!r}")


def cmd_realize(args) -> int:
    config = _config_from_args(args)
    f = _load_function(args.input, config)
    try:
        r = _realize_with_form(f, config)
    except PickFalsified as err:
        _emit({"status": FALSIFIED, "witness": err.witness, "report": str(err)})
        return EXIT_FALSIFIED
    except SolverStalled as err:
        _emit({"status": "SolverStalled", "report": str(err)})
        return EXIT_STALLED
    report = certify(r, f, n_points=config.samples, seed=config.seed, tol=config.tol)
    _emit(serialize.realization_to_json(r, certificate=report.to_json()))
    return EXIT_OK if report.ok else EXIT_STALLED


def cmd_certify(args) -> int:
    config = _config_from_args(args)
    f = _load_function(args.function, config)
    r = serialize.realization_from_json(serialize.loads_file(args.realization),
                                        where=args.realization)
    report = certify(r, f, n_points=config.samples, seed=config.seed, tol=config.tol)
    _emit(report.to_json())
    return EXIT_OK if report.ok else EXIT_FALSIFIED


def cmd_batch(args) -> int:
    config = _config_from_args(args)
    directory = Path(args.directory)
    if not directory.is_dir():
        raise InputFormatError(f"{args.directory}: not a directory")
    rows = []
    for path in sorted(directory.glob("*.json")):
        row = {"file": path.name}
        try:
            f = _load_function(str(path), config)
            r = _realize_with_form(f, config)
            report = certify(r, f, n_points=config.samples, seed=config.seed,
                             tol=config.tol)
            row["status"] = "certified" if report.ok else "certification-failed"
            row["exit_code"] = EXIT_OK if report.ok else EXIT_STALLED
            row["size"] = int(r.H.shape[0])
            row["max_eval_residual"] = report.checks[0]["residual"]
        except PickFalsified as err:
            row["status"] = FALSIFIED
            row["exit_code"] = EXIT_FALSIFIED
            row["witness"] = err.witness
        except SolverStalled as err:
            row["status"] = "SolverStalled"
            row["exit_code"] = EXIT_STALLED
            row["report"] = str(err)
        except (InputFormatError, PickRealizeError) as err:
            row["status"] = "input-error"
            row["exit_code"] = EXIT_INPUT
            row["report"] = str(err)
        rows.append(row)
    _emit({"results": rows, "total": len(rows),
           "certified": sum(1 for r in rows if r.get("exit_code") == EXIT_OK)})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pickrealize",
        description="Pick-class membership tests and constructive matrix "
                    "realizations for rational matrix functions")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9,
                        help="certification tolerance (default 1e-9)")
    common.add_argument("--samples", type=int, default=200,
                        help="sample points for verification (default 200)")
    common.add_argument("--seed", type=int, default=42,
                        help="RNG seed; PICKREALIZE_SEED overrides")
    common.add_argument("--max-iters", type=int, default=20000, dest="max_iters",
                        help="feasibility solver iteration cap (default 20000)")
    common.add_argument("--mode", choices=("exact", "float"), default="exact",
                        help="coefficient mode for the symbolic pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common],
                       help="decide Pick-class membership")
    p.add_argument("input", help="function JSON file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce", parents=[common],
                       help="reduce to a multi-affine function")
    p.add_argument("input", help="function JSON file")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("lift", parents=[common],
                       help="lift to a real-point symmetric function")
    p.add_argument("input", help="function JSON file")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("sos", parents=[common],
                       help="factor a PSD matrix polynomial as Phi Phi^#")
    p.add_argument("input", help="matrix polynomial JSON file")
    p.set_defaults(func=cmd_sos)

    p = sub.add_parser("realize", parents=[common],
                       help="construct a certified realization")
    p.add_argument("--form", choices=("schur", "transfer", "pencil"),
                   default="schur", help="output realization form")
    p.add_argument("input", help="function JSON file")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("certify", parents=[common],
                       help="re-check a realization against its function")
    p.add_argument("function", help="function JSON file")
    p.add_argument("realization", help="realization JSON file")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("batch", parents=[common],
                       help="realize and certify every function in a directory")
    p.add_argument("--form", choices=("schur", "transfer", "pencil"),
                   default="schur", help="realization form for every file")
    p.add_argument("directory", help="directory of function JSON files")
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputFormatError as err:
        sys.stderr.write(f"input error: {err}\n")
        return EXIT_INPUT
    except PickRealizeError as err:
        sys.stderr.write(f"error: {err}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
