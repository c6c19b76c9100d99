"""Command-line interface: ``fracpg {solve, converge, oracle-check, validate, examples}``.

Exit codes: 0 success, 2 invalid input, 3 numeric failure, 4 oracle mismatch,
5 failed self-check. Failures print a JSON object with ``error`` and
``message`` to stdout (and to ``error.json`` under ``--out`` when given).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AccuracyError, DomainError, GridMismatchError, NumericError, ProblemValidationError
from .fracseries import series_solution
from .operators import assemble, dump_matrices
from .problem import BUILTINS, builtin, load_problem, random_problem
from .solver import convergence_study, error_report, evaluate, solve_recurrence
from .validate import format_table, run_suite

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_ORACLE, EXIT_PROPERTY = 0, 2, 3, 4, 5
ORACLE_TOL = 1e-10
CSV_HEADER = ["N", "e_L2", "e_Linf", "e_wL2", "cpu_seconds"]
DEFAULT_N = {"example1": [8, 16, 32, 64], "example2": [650, 680, 710], "example3": [4, 6, 9]}
SAMPLE_POINTS = 200
# extra grid indices kept when expanding builtin data beyond the largest N
GUARD = 8


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str, extra: dict | None = None):
        super().__init__(message)
        self.code = code
        self.kind = kind
        self.extra = extra or {}


# ---------------------------------------------------------------- output helpers


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return str(obj)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default, allow_nan=True) + "\n"


def parse_N_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise CliError(EXIT_INVALID, "ValidationError", f"--N expects integers, got {text!r}") from exc
    if not values:
        raise CliError(EXIT_INVALID, "ValidationError", "--N is empty")
    return values


# ---------------------------------------------------------------- problem selection


def resolve_problem(args, N_max: int):
    if args.builtin and args.problem:
        raise CliError(EXIT_INVALID, "ValidationError", "give either --builtin or --problem, not both")
    if args.builtin:
        if args.builtin not in BUILTINS:
            raise CliError(EXIT_INVALID, "ValidationError", f"unknown builtin {args.builtin!r}")
        return builtin(args.builtin, order=N_max + GUARD)
    if args.problem:
        return load_problem(Path(args.problem))
    if getattr(args, "seed", None) is not None:
        return random_problem(args.seed)
    raise CliError(EXIT_INVALID, "ValidationError", "a problem is required: --builtin NAME or --problem FILE")


def _dps(args, spec):
    return args.dps if args.dps is not None else spec.dps


def _check_N(spec, N_list):
    bad = [N for N in N_list if N < spec.ab]
    if bad:
        raise CliError(EXIT_INVALID, "ValidationError",
                       f"N must be at least alpha*b = {spec.ab} (got {', '.join(map(str, bad))})")


# ---------------------------------------------------------------- commands


def cmd_solve(args) -> int:
    N = parse_N_list(args.N)
    if len(N) != 1:
        raise CliError(EXIT_INVALID, "ValidationError", "solve takes a single N")
    N = N[0]
    spec = resolve_problem(args, N)
    _check_N(spec, [N])
    sol = solve_recurrence(spec, N, dps=_dps(args, spec))
    errors = error_report(sol).as_dict() if spec.has_exact else None
    t = spec.T * np.linspace(0.0, 1.0, SAMPLE_POINTS)
    y = evaluate(sol, t)
    result = {
        "problem": spec.name,
        "N": N,
        "coefficients": {
            "fgjf": [float(x) for x in sol.cbar],
            "monomial": [float(x) for x in sol.cbarbar],
        },
        "errors": errors,
        "runtime_seconds": sol.runtime_seconds,
        "dps": sol.dps,
    }
    out = Path(args.out) if args.out else None
    if out:
        atomic_write(out / "result.json", _dump_json(result))
        rows = [(ti, yi, float(spec.exact_value(ti))) for ti, yi in zip(t, y)] if spec.has_exact else zip(t, y)
        header = ["t", "y_N", "exact"] if spec.has_exact else ["t", "y_N"]
        atomic_write(out / "samples.csv", _csv_text(header, rows))
        if args.emit_matrices:
            if sol.is_mp:
                raise CliError(EXIT_INVALID, "ValidationError", "--emit-matrices needs a binary64 solve")
            dump_matrices(assemble(sol.shifted, sol.N_hat), out / "matrices", lam=float(spec.lam))
    summary = {k: result[k] for k in ("problem", "N", "errors", "runtime_seconds")}
    summary["monomial_head"] = result["coefficients"]["monomial"][:8]
    print(_dump_json(summary), end="")
    return EXIT_OK


def cmd_converge(args) -> int:
    if args.N:
        N_list = parse_N_list(args.N)
    elif args.builtin in DEFAULT_N:
        N_list = DEFAULT_N[args.builtin]
    else:
        raise CliError(EXIT_INVALID, "ValidationError", "converge needs --N for non-builtin problems")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise CliError(EXIT_INVALID, "ValidationError", "--N must be strictly ascending")
    spec = resolve_problem(args, max(N_list))
    _check_N(spec, N_list)
    if not spec.has_exact:
        raise CliError(EXIT_INVALID, "ValidationError", "convergence study needs an exact solution")
    table = convergence_study(spec, N_list, dps=_dps(args, spec))
    rows = [[r[h] for h in CSV_HEADER] for r in table.rows]
    semilog = [(r["N"], math.log10(r["e_L2"]) if r["e_L2"] > 0 else float("-inf")) for r in table.rows]
    meta = {
        "problem": spec.name,
        "N": N_list,
        "gating": spec.gating,
        "dps": _dps(args, spec),
        "fit": {"slope": table.slope, "intercept": table.intercept, "correlation": table.correlation},
        "rows": table.rows,
    }
    if args.out:
        out = Path(args.out)
        atomic_write(out / "convergence.csv", _csv_text(CSV_HEADER, rows))
        atomic_write(out / "semilog.csv", _csv_text(["N", "log10_e_L2"], semilog))
        atomic_write(out / "convergence.json", _dump_json(meta))
    sys.stdout.write(_csv_text(CSV_HEADER, rows))
    fit = "no fit (single N)" if table.slope is None else (
        f"slope {table.slope:.4g} per N, correlation {table.correlation}")
    note = "" if spec.gating else " [non-gating benchmark]"
    print(f"# {spec.name}: {fit}{note}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    N = parse_N_list(args.N or "16")[0]
    spec = resolve_problem(args, N)
    _check_N(spec, [N])
    dps = _dps(args, spec)
    sol = solve_recurrence(spec, N, dps=dps)
    oracle = series_solution(spec, N, mp=dps is not None)
    diff = max(float(abs(a - b)) for a, b in zip(sol.cbarbar, oracle.coef[spec.ab:]))
    passed = diff <= ORACLE_TOL
    print(_dump_json({"problem": spec.name, "N": N, "max_abs_diff": diff, "tolerance": ORACLE_TOL,
                      "passed": passed}), end="")
    if not passed:
        raise CliError(EXIT_ORACLE, "OracleMismatch", f"max difference {diff:.3e} exceeds {ORACLE_TOL:g}",
                       {"max_abs_diff": diff})
    return EXIT_OK


def cmd_validate(args) -> int:
    seed = 0 if args.seed is None else args.seed
    results = run_suite(seed=seed, quick=args.quick)
    print(format_table(results))
    if args.out:
        payload = [{"name": r.name, "passed": r.passed, "detail": r.detail, "seconds": r.seconds} for r in results]
        atomic_write(Path(args.out) / "validate.json", _dump_json({"seed": seed, "results": payload}))
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise CliError(EXIT_PROPERTY, "PropertyFailure", f"failed checks: {', '.join(failed)}")
    return EXIT_OK


def cmd_examples(args) -> int:
    for name in BUILTINS:
        spec = builtin(name, order=16)
        extra = f", {spec.dps} digits, non-gating" if spec.dps else ""
        print(f"{name}: alpha={spec.alpha} beta={spec.beta} T={spec.T:.6g} b={spec.b} "
              f"alpha*b={spec.ab} beta*b={spec.bb}{extra} (default N {DEFAULT_N[name]})")
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracpg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, N_help):
        p.add_argument("--builtin", help=f"one of {', '.join(BUILTINS)}")
        p.add_argument("--problem", help="problem JSON file")
        p.add_argument("--N", help=N_help)
        p.add_argument("--out", help="output directory")
        p.add_argument("--dps", type=int, default=None, help="mpmath digits (default: problem recommendation)")
        p.add_argument("--seed", type=int, default=None, help="random problem seed when no problem is given")

    p = sub.add_parser("solve", help="solve for one N")
    common(p, "truncation degree N")
    p.add_argument("--emit-matrices", action="store_true", help="dump operational matrices as CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("converge", help="error table over an ascending N list")
    common(p, "comma-separated ascending N list")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("oracle-check", help="compare with the independent series oracle")
    common(p, "truncation degree N (default 16)")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("validate", help="run the self-check suite")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--quick", action="store_true")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("examples", help="list builtin problems")
    p.set_defaults(func=cmd_examples)
    return parser


def _fail(err: CliError, out) -> int:
    payload = {"error": err.kind, "message": str(err), "exit_code": err.code, **err.extra}
    print(_dump_json(payload), end="")
    if out:
        try:
            atomic_write(Path(out) / "error.json", _dump_json(payload))
        except OSError:
            pass
    return err.code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "solve" and not args.N:
        parser.error("solve requires --N")
    out = getattr(args, "out", None)
    start = time.perf_counter()
    try:
        return args.func(args)
    except CliError as err:
        return _fail(err, out)
    except ProblemValidationError as exc:
        return _fail(CliError(EXIT_INVALID, "ValidationError", str(exc),
                              {"issues": [{"path": p, "message": m} for p, m in exc.issues]}), out)
    except (DomainError, GridMismatchError, FileNotFoundError, KeyError) as exc:
        return _fail(CliError(EXIT_INVALID, type(exc).__name__, str(exc)), out)
    except (NumericError, AccuracyError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail(CliError(EXIT_NUMERIC, type(exc).__name__, str(exc),
                              {"elapsed_seconds": time.perf_counter() - start}), out)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
