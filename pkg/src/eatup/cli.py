"""Command-line driver: ``eatup {solve,limit,tvc,compare,diagnose}``.

Exit codes: 0 success, 1 input or specification error, 2 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Sequence

from . import __version__
from .core import atomic_write_text, is_attainable, path_to_csv, read_path_csv
from .criteria import compare
from .errors import EatupError, NoConvergenceError
from .limit import HorizonSolveError, limit_path, parse_schedule
from .models import model_registry
from .numerics import NewtonOptions
from .solver import solve_finite
from .tvc import assumption_diagnostics, audit_tvc

log = logging.getLogger("eatup")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2

_FLAG_PARAMS = {"alpha": "alpha", "beta": "beta", "k0": "k0", "a": "a", "b": "b"}


class InputError(EatupError):
    """Bad command-line arguments or problem-spec file."""


# ---------------------------------------------------------------------------
# problem assembly
# ---------------------------------------------------------------------------


def load_spec(path: str) -> dict:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read problem spec {path!r}: {exc}") from exc
    if not isinstance(spec, dict) or "model" not in spec:
        raise InputError("problem spec must be a JSON object with a 'model' field")
    if spec["model"] == "custom" and not spec.get("expr"):
        raise InputError("custom problem spec requires 'expr'")
    return spec


def _bound(b, default):
    return default if b is None else float(b)


def _override(merged: dict, key: str, value, origin: str) -> None:
    if value is None:
        return
    if key in merged and merged[key] != value:
        log.warning("flag %s=%r overrides %r from the spec file", origin, value, merged[key])
    merged[key] = value


def build_problem(args):
    spec = load_spec(args.spec) if args.spec else {}
    model = spec.get("model")
    if args.model is not None:
        if model is not None and model != args.model:
            log.warning("flag --model=%s overrides %r from the spec file", args.model, model)
        model = args.model
    if model is None:
        model = "custom" if args.expr else None
    if model is None:
        raise InputError("choose a model with --model or --spec")

    params = {k: float(v) for k, v in (spec.get("params") or {}).items()}
    for flag, name in _FLAG_PARAMS.items():
        _override(params, name, getattr(args, flag), f"--{flag}")
    for item in args.param or []:
        name, _, val = item.partition("=")
        if not name or not _:
            raise InputError(f"--param expects NAME=VALUE, got {item!r}")
        _override(params, name, float(val), f"--param {name}")

    if model == "counterexample" and (args.x0 is not None or "x0" in spec):
        params["x0"] = float(args.x0 if args.x0 is not None else spec["x0"])
    if model != "custom":
        if model == "growth" and "k0" not in params and (args.x0 is not None or "x0" in spec):
            params["k0"] = float(args.x0 if args.x0 is not None else spec["x0"])
        return model_registry(model, params)

    expr = args.expr or spec.get("expr")
    if args.expr and spec.get("expr") and args.expr != spec["expr"]:
        log.warning("flag --expr overrides the spec file expression")
    bounds = spec.get("bounds") or [None, None]
    if args.bounds:
        bounds = args.bounds
    x0 = args.x0 if args.x0 is not None else spec.get("x0")
    return model_registry(
        "custom",
        params,
        expr=expr,
        feasible_if=args.feasible_if or spec.get("feasible_if"),
        bounds=(_bound(bounds[0], -math.inf), _bound(bounds[1], math.inf)),
        x0=x0,
    )


def newton_options(args) -> NewtonOptions:
    try:
        return NewtonOptions(tol=args.tol) if args.tol is not None else NewtonOptions()
    except ValueError as exc:
        raise InputError(str(exc)) from exc


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()


def _emit(text: str, dest: str | None) -> None:
    if dest is None or dest == "-":
        sys.stdout.write(text)
    else:
        atomic_write_text(dest, text)


def _write_report(args, payload: dict, csv_text: str, plot_files: dict) -> None:
    if args.format == "csv":
        _emit(csv_text, args.out)
    else:
        _emit(json.dumps(payload, indent=2, allow_nan=False) + "\n", args.out)
    if args.emit_plot_data:
        for suffix, text in plot_files.items():
            atomic_write_text(f"{args.emit_plot_data}{suffix}", text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    if args.horizon is None or args.horizon < 0:
        raise InputError("--horizon must be a nonnegative integer")
    problem = build_problem(args)
    report = solve_finite(problem, args.horizon, newton_options(args))
    text = path_to_csv(report.path)
    _write_report(args, report.to_dict(), text, {"_path.csv": text})
    return EXIT_OK if report.converged else EXIT_NUMERIC


def cmd_limit(args) -> int:
    problem = build_problem(args)
    if args.window < 1:
        raise InputError("--window must be >= 1")
    schedule = parse_schedule(args.schedule, args.window, args.max_T)
    report = limit_path(problem, args.window, schedule, tol=args.limit_tol, opts=newton_options(args))
    gap_csv = _csv_text(["T", "delta"], [(int(T), float(d)) for T, d in zip(report.gap.horizons, report.gap.deltas)])
    _write_report(
        args,
        report.to_dict(),
        gap_csv,
        {"_gap.csv": gap_csv, "_limit_path.csv": path_to_csv(report.limit_path)},
    )
    if not report.converged:
        log.warning("limit not converged: max last-step delta %.3e >= %.3e", report.per_t_convergence.max(), args.limit_tol)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_tvc(args) -> int:
    problem = build_problem(args)
    if args.Tmax < 1:
        raise InputError("--Tmax must be >= 1")
    if args.path:
        path = read_path_csv(args.path)
        ok, idx = is_attainable(problem, path)
        if not ok:
            raise InputError(f"path file does not match the problem (first violation at t={idx})")
    else:
        horizon = args.solve_horizon or 2 * args.Tmax
        if horizon < args.Tmax:
            raise InputError("--solve-horizon must be >= --Tmax")
        path = solve_finite(problem, horizon, newton_options(args)).path
    report = audit_tvc(problem, path, args.Tmax)
    text = _csv_text(["T", "K", "E"], report.csv_rows())
    _write_report(args, report.to_dict(), text, {"_tvc.csv": text})
    return EXIT_OK


def cmd_compare(args) -> int:
    problem = build_problem(args)
    a, b = read_path_csv(args.path_a), read_path_csv(args.path_b)
    horizons = None
    if args.Tmax is not None:
        horizons = range(0, args.Tmax + 1)
    report = compare(problem, a, b, args.criterion, horizons=horizons)
    text = _csv_text(["T", "D"], [(int(T), float(d)) for T, d in zip(report.horizons, report.d_series)])
    _write_report(args, report.to_dict(), text, {"_d.csv": text})
    return EXIT_OK


def cmd_diagnose(args) -> int:
    problem = build_problem(args)
    region = (tuple(args.x_range), tuple(args.y_range))
    report = assumption_diagnostics(problem, region, args.samples, seed=args.seed)
    payload = report.to_dict()
    text = _csv_text(list(payload), [list(payload.values())])
    _write_report(args, payload, text, {})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _problem_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("problem")
    g.add_argument("--model", choices=["growth", "counterexample", "custom"])
    g.add_argument("--spec", help="problem-spec JSON file")
    g.add_argument("--expr", help="return function v(x, y, t) for custom problems")
    g.add_argument("--feasible-if", dest="feasible_if", help="explicit domain, e.g. 'y < x^0.5 and x > 0'")
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--k0", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--b", type=float)
    g.add_argument("--x0", type=float)
    g.add_argument("--bounds", type=float, nargs=2, metavar=("LOWER", "UPPER"))
    g.add_argument("--param", action="append", metavar="NAME=VALUE", help="bind an expression parameter")
    g.add_argument("--tol", type=float, help="Euler residual tolerance")


def _output_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("output")
    g.add_argument("--out", help="report file (default: stdout)")
    g.add_argument("--format", choices=["json", "csv"], default="json")
    g.add_argument("--emit-plot-data", dest="emit_plot_data", metavar="PREFIX", help="also write CSV series as PREFIX_*.csv")
    g.add_argument("--seed", type=int, default=0, help="seed for sampled diagnostics")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; exit status 2 is reserved for non-convergence
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eatup", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve the horizon-T truncated problem")
    _problem_flags(p)
    p.add_argument("--horizon", type=int, required=True)
    _output_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("limit", help="horizon limit x°(t) and optimality gap")
    _problem_flags(p)
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--max-T", dest="max_T", type=int, default=256)
    p.add_argument("--schedule", default="doubling", help="doubling | linear:<step>")
    p.add_argument("--limit-tol", dest="limit_tol", type=float, default=1e-8)
    _output_flags(p)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("tvc", help="audit transversality-condition series")
    _problem_flags(p)
    p.add_argument("--Tmax", type=int, default=200)
    p.add_argument("--path", help="audit this path CSV instead of a solved one")
    p.add_argument("--solve-horizon", dest="solve_horizon", type=int, help="horizon of the solved path (default 2*Tmax)")
    _output_flags(p)
    p.set_defaults(func=cmd_tvc)

    p = sub.add_parser("compare", help="overtaking comparison of two path CSVs")
    _problem_flags(p)
    p.add_argument("--path-a", dest="path_a", required=True)
    p.add_argument("--path-b", dest="path_b", required=True)
    p.add_argument("--criterion", choices=["modified", "brock"], default="modified")
    p.add_argument("--Tmax", type=int, help="largest comparison horizon (default: as long as the paths allow)")
    _output_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("diagnose", help="sample concavity / cross-partial / continuity checks")
    _problem_flags(p)
    p.add_argument("--x-range", dest="x_range", type=float, nargs=2, required=True)
    p.add_argument("--y-range", dest="y_range", type=float, nargs=2, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    _output_flags(p)
    p.set_defaults(func=cmd_diagnose)
    return parser


def _is_numeric_failure(exc: BaseException) -> bool:
    if isinstance(exc, NoConvergenceError):
        return True
    return isinstance(exc, HorizonSolveError) and isinstance(exc.cause, NoConvergenceError)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="eatup: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (EatupError, ValueError, OSError) as exc:
        if _is_numeric_failure(exc):
            print(f"eatup: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"eatup: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
