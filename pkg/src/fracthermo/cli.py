"""Command-line front end.

    fracthermo classify PROBLEM
    fracthermo solve PROBLEM --rho R [--out eig.csv]
    fracthermo bounds PROBLEM (--rho R | --rho-list A,B,.. | --rho-range START STOP COUNT)
    fracthermo sweep PROBLEM RHOS [--solve] [--csv rows.csv] [--svg band.svg] [--jobs J]
    fracthermo verify PROBLEM eig.csv
    fracthermo plot PROBLEM RHOS --svg band.svg [--solve]

Reports are ``key = value`` lines.  Failures print one ``ERROR <code> <message>``
line to stderr and exit with 2 (parse/validation), 3 (no convergence),
4 (hypothesis failure) or 5 (I/O).
"""

from __future__ import annotations

import argparse
import csv
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import compute_L_U, csv_text, emit_csv, emit_svg, fmt_float, sweep
from .eigensolver import (
    SEED_PROFILES,
    SolveOptions,
    check_cone,
    eigenpair_from_samples,
    solve_eigenpair,
    verify_residuals,
)
from .errors import (
    BreakdownZeroNorm,
    FracThermoError,
    HypothesisFail,
    NonConvergence,
)
from .kernelcore import classify
from .quadops import QuadratureRule
from .specparse import load_problem

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_NONCONVERGENCE = 3
EXIT_HYPOTHESIS = 4
EXIT_IO = 5


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_PARSE, message)


# {{{ helpers


def resolve_problem_path(path) -> Path:
    """``path`` itself, or the shipped problem file of the same name."""
    p = Path(path)
    if p.exists():
        return p
    shipped = resources.files("fracthermo") / "problems" / p.name
    if shipped.is_file():
        return Path(str(shipped))
    raise CliError(EXIT_IO, f"cannot read problem file {path}: no such file")


def _rho_values(args):
    forms = [args.rho is not None, args.rho_list is not None, args.rho_range is not None]
    if sum(forms) != 1:
        raise CliError(EXIT_PARSE, "give exactly one of --rho, --rho-list, --rho-range")
    if args.rho is not None:
        rhos = [args.rho]
    elif args.rho_list is not None:
        try:
            rhos = [float(x) for x in args.rho_list.split(",") if x.strip()]
        except ValueError:
            raise CliError(EXIT_PARSE, f"bad --rho-list {args.rho_list!r}") from None
    else:
        start, stop, count = args.rho_range
        if count != int(count) or count < 1:
            raise CliError(EXIT_PARSE, "--rho-range COUNT must be a positive integer")
        rhos = list(np.linspace(start, stop, int(count)))
    if not rhos or any(not r > 0.0 for r in rhos):
        raise CliError(EXIT_PARSE, "rho values must be positive")
    return [float(r) for r in rhos]


def _solve_options(args) -> SolveOptions:
    if args.n < 65 or args.n % 2 == 0:
        raise CliError(EXIT_PARSE, f"--n must be odd and >= 65, got {args.n}")
    try:
        return SolveOptions(
            n=args.n,
            rule=QuadratureRule(panels=args.panels, nodes_per_panel=args.nodes),
            tol=args.tol,
            max_iter=args.max_iter,
            seed_profile=args.seed,
            theta=args.theta,
            b=args.b,
        )
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None


def _report(pairs, out):
    for key, value in pairs:
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = fmt_float(value)
        print(f"{key} = {value}", file=out)


def _write_eigenfunction(path, u):
    lines = ["t,u"]
    lines += [f"{fmt_float(t)},{fmt_float(v)}" for t, v in zip(u.t, u.values)]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_eigenfunction(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["t", "u"]:
        raise CliError(EXIT_PARSE, f"{path}: expected header 't,u'")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != 2:
        raise CliError(EXIT_PARSE, f"{path}: expected two numeric columns")
    n = data.shape[0]
    if n < 65 or n % 2 == 0:
        raise CliError(EXIT_PARSE, f"{path}: need an odd number >= 65 of rows, got {n}")
    if np.max(np.abs(data[:, 0] - np.linspace(0.0, 1.0, n))) > 1e-12:
        raise CliError(EXIT_PARSE, f"{path}: t column is not the uniform grid on [0, 1]")
    return data[:, 1]


# }}}

# {{{ commands


def cmd_classify(args, spec, out):
    case = classify(spec, args.b)
    th = case.thresholds
    _report([
        ("case", case.case_id),
        ("beta", case.beta),
        ("beta_K", th.beta_K),
        ("beta_gamma", th.beta_gamma),
        ("t_K", th.t_K),
        ("t_gamma", th.t_gamma),
        ("t_star", th.t_star),
        ("b", case.b),
        ("phi", case.phi_const),
        ("c_K", case.c_K),
        ("sigma_gamma", case.sigma_gamma),
        ("sigma", case.sigma),
        ("tau", case.tau),
    ], out)
    return EXIT_OK


def cmd_solve(args, spec, out):
    if args.rho is None:
        raise CliError(EXIT_PARSE, "solve needs --rho")
    if not args.rho > 0.0:
        raise CliError(EXIT_PARSE, "rho must be positive")
    opts = _solve_options(args)
    case = classify(spec, args.b)
    ep = solve_eigenpair(spec, args.rho, opts)
    report = verify_residuals(ep, spec, opts)
    cone = check_cone(ep.u, case)
    _report([
        ("case", case.case_id),
        ("rho", ep.rho),
        ("lambda", ep.lam),
        ("iterations", ep.iterations),
        ("fp_residual", report.fp),
        ("bc1_residual", report.bc1),
        ("bc2_residual", report.bc2),
        ("ode_residual", report.ode),
        ("ode_residual_full", report.ode_full),
        ("residuals_ok", report.ok),
        ("cone_sigma", cone.sigma),
        ("cone_b", cone.b),
        ("cone_min_on_0b", cone.min_on_0b),
        ("cone_nonneg_on_01", cone.nonneg_on_01),
        ("cone_satisfied", cone.satisfied),
    ], out)
    if args.out:
        _write_eigenfunction(args.out, ep.u)
    return EXIT_OK


def cmd_bounds(args, spec, out):
    for rho in _rho_values(args):
        row = compute_L_U(spec, rho, b_override=args.b, strict=True,
                          sharpen=args.sharpen,
                          rule=QuadratureRule(args.panels, args.nodes))
        _report([("rho", row.rho), ("L", row.L), ("U", row.U)], out)
    return EXIT_OK


def _sweep_rows(args, spec):
    opts = _solve_options(args)
    if args.jobs < 1:
        raise CliError(EXIT_PARSE, "--jobs must be >= 1")
    return sweep(spec, _rho_values(args), solve=args.solve, opts=opts,
                 jobs=args.jobs, sharpen=args.sharpen)


def cmd_sweep(args, spec, out):
    rows = _sweep_rows(args, spec)
    if args.csv:
        emit_csv(rows, args.csv)
    else:
        out.write(csv_text(rows))
    if args.svg:
        emit_svg(rows, args.svg)
    return EXIT_OK


def cmd_plot(args, spec, out):
    if not args.svg:
        raise CliError(EXIT_PARSE, "plot needs --svg")
    emit_svg(_sweep_rows(args, spec), args.svg)
    return EXIT_OK


def cmd_verify(args, spec, out):
    opts = _solve_options(args)
    values = _read_eigenfunction(args.eigenfunction)
    ep = eigenpair_from_samples(values, spec, opts)
    report = verify_residuals(ep, spec, opts)
    cone = check_cone(ep.u, classify(spec, args.b))
    flags = report.flags
    _report([
        ("rho", ep.rho),
        ("lambda", ep.lam),
        ("fp_residual", report.fp),
        ("fp_ok", not flags["fp"]),
        ("bc1_residual", report.bc1),
        ("bc1_ok", not flags["bc1"]),
        ("bc2_residual", report.bc2),
        ("bc2_ok", not flags["bc2"]),
        ("ode_residual", report.ode),
        ("ode_ok", not flags["ode"]),
        ("cone_satisfied", cone.satisfied),
        ("verified", report.ok),
    ], out)
    return EXIT_OK if report.ok else EXIT_CHECK_FAILED


COMMANDS = {
    "classify": cmd_classify,
    "solve": cmd_solve,
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "plot": cmd_plot,
}


# }}}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracthermo", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("problem", help="problem file")
        p.add_argument("--b", type=float, default=None, help="override the interval end b")
        p.add_argument("--panels", type=int, default=32)
        p.add_argument("--nodes", type=int, default=8, help="Gauss nodes per panel")

    def solver(p):
        p.add_argument("--n", type=int, default=1025, help="grid nodes (odd, >= 65)")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--max-iter", type=int, default=500)
        p.add_argument("--theta", type=float, default=1.0, help="relaxation in (0, 1]")
        p.add_argument("--seed", choices=SEED_PROFILES, default="constant")

    def rhos(p):
        p.add_argument("--rho", type=float)
        p.add_argument("--rho-list", help="comma separated values")
        p.add_argument("--rho-range", type=float, nargs=3,
                       metavar=("START", "STOP", "COUNT"))
        p.add_argument("--sharpen", action="store_true",
                       help="use the cone floor for the functional lower bounds")

    p = sub.add_parser("classify", help="thresholds, case and cone constants")
    common(p)

    p = sub.add_parser("solve", help="eigenpair with prescribed norm")
    common(p)
    solver(p)
    p.add_argument("--rho", type=float)
    p.add_argument("--out", help="write the eigenfunction as t,u CSV")

    p = sub.add_parser("bounds", help="localization interval [L, U]")
    common(p)
    rhos(p)

    for name, text in (("sweep", "bounds (and eigenvalues) over many rho"),
                       ("plot", "SVG of the localization band")):
        p = sub.add_parser(name, help=text)
        common(p)
        solver(p)
        rhos(p)
        p.add_argument("--solve", action="store_true", help="also solve for eigenpairs")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--svg")
        if name == "sweep":
            p.add_argument("--csv", help="write rows here instead of stdout")

    p = sub.add_parser("verify", help="re-check a stored eigenfunction")
    common(p)
    solver(p)
    p.add_argument("eigenfunction", help="t,u CSV written by solve --out")
    return parser


def _exit_code(exc) -> int:
    if isinstance(exc, CliError):
        return exc.code
    if isinstance(exc, NonConvergence):
        return EXIT_NONCONVERGENCE
    if isinstance(exc, (HypothesisFail, BreakdownZeroNorm)):
        return EXIT_HYPOTHESIS
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_PARSE


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        path = resolve_problem_path(args.problem)
        spec = load_problem(path)
        return COMMANDS[args.command](args, spec, out)
    except (CliError, FracThermoError, OSError, ValueError) as exc:
        code = _exit_code(exc)
        message = " ".join(str(exc).split())
        print(f"ERROR {code} {message}", file=err)
        return code


if __name__ == "__main__":
    sys.exit(main())
