"""Command-line front end.

Subcommands: analyze, gen-so2, optimize, run, stepsearch, convergence,
table1.  All commands are deterministic given their flags; CSV output
uses '.' decimals and always carries a header row.

Exit codes: 0 success, 1 uncertified optimizer result, 2 usage error,
3 validation failure, 4 infeasible search, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from . import msrkio, pdelab
from .methods import ssp_coefficient, ssprk33, to_spijker, validate
from .optimizer import SearchFailure, SearchSpec, maximize_ssp, warm_start_ladder, write_search_log
from .orderlab import convergence_order, oracle_order, stage_order
from .theory import (
    gen_second_order,
    linear_order,
    r_sk2,
    stability_polynomials,
    threshold_factor,
)

EXIT_OK = 0
EXIT_UNCERTIFIED = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_INFEASIBLE = 4
EXIT_NUMERICAL = 5

_PROBLEMS = {
    "vdp": lambda: pdelab.vdp_problem(),
    "advection": lambda: pdelab.advection_upwind(),
    "buckley": lambda: pdelab.buckley_leverett(),
}


def _load_method(path):
    try:
        return msrkio.read_method(path)
    except FileNotFoundError:
        print(f"error: no such file: {path}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE) from None
    except msrkio.MethodFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION) from None


def cmd_analyze(args) -> int:
    method = _load_method(args.method_file)
    report = validate(method)
    print(f"name: {method.name}")
    print(f"s: {method.s}")
    print(f"k: {method.k}")
    print(f"valid: {'yes' if report.ok else 'no'}")
    for v in report.violations:
        print(f"violation: {v}")

    if report.ok:
        sp = to_spijker(method)
        C = ssp_coefficient(sp)
    else:
        C = 0.0
        print("warning: method invalid; SSP coefficient reported as 0")
    print(f"C: {C:.9f}")
    print(f"C_eff: {C / method.s:.9f}")

    if report.ok:
        pols = stability_polynomials(sp)
        q = stage_order(method)
        lin = linear_order(pols)
        orc = oracle_order(method, pmax=min(12, max(lin + 1, method.claimed_order + 1)))
        thr = threshold_factor(pols)
        print(f"stage_order: {q}")
        print(f"linear_order: {lin}")
        print(f"oracle_order: {orc}")
        print("threshold_factor: " + ("inf" if math.isinf(thr) else f"{thr:.9f}"))
        print(f"bound_C_le_s: {'ok' if C <= method.s + 1e-8 else 'VIOLATED'}")
        if orc >= 2 and method.k >= 2:
            ok = C <= r_sk2(method.s, method.k) + 1e-8
            print(f"bound_C_le_rsk2: {'ok' if ok else 'VIOLATED'}")
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_gen_so2(args) -> int:
    method = gen_second_order(args.stages, args.steps)
    msrkio.write_method(method, args.out)
    print(f"wrote {method.name} to {args.out}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    warm = warm_start_ladder(args.stages, args.steps, args.order)
    spec = SearchSpec(
        s=args.stages, k=args.steps, p=args.order,
        starts=args.starts, seed=args.seed, r_tol=args.r_tol,
        warm_starts=warm,
    )
    try:
        result = maximize_ssp(spec)
    except SearchFailure as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    msrkio.write_method(result.method, args.out)
    if args.log:
        write_search_log(result.history, args.log)
    print(f"C: {result.C:.9f}")
    print(f"C_eff: {result.Ceff:.9f}")
    print(f"certified: {'yes' if result.certified else 'no'}")
    print(f"wrote {result.method.name} to {args.out}")
    return EXIT_OK if result.certified else EXIT_UNCERTIFIED


def _get_problem(name):
    try:
        return _PROBLEMS[name]()
    except KeyError:
        print(f"error: unknown problem {name!r}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE) from None


def cmd_run(args) -> int:
    problem = _get_problem(args.problem)
    method = _load_method(args.method)
    try:
        record = pdelab.run(problem, method, args.dt, args.tf, startup_mode=args.startup)
    except pdelab.RunAbortedError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        names = sorted(record.monitors)
        writer.writerow(["t"] + names)
        for i, t in enumerate(record.times):
            writer.writerow([f"{t:.12g}"] + [f"{record.monitors[n][i]:.12g}" for n in names])
    if record.final_error is not None:
        print(f"final_error: {record.final_error:.6e}")
    print(f"wrote {len(record.times)} rows to {args.out}")
    return EXIT_OK


def cmd_stepsearch(args) -> int:
    problem = _get_problem(args.problem)
    method = _load_method(args.method)
    props = ["tvd", "positivity"] if args.property == "both" else [args.property]
    results = {}
    for prop in props:
        results[prop] = pdelab.max_stable_step(
            problem, method, prop, resolution=args.resolution,
            tf=args.tf, startup_mode=args.startup,
        )
    s = method.s
    C = ssp_coefficient(to_spijker(method))
    dx = problem.dx if problem.dx is not None else problem.dt_fe
    row = {
        "method": f"({method.s},{method.k},{method.claimed_order})",
        "dt_tvd/dx": "",
        "dt_tvd/(s*dx)": "",
        "C*dt_fe/dx": f"{C * problem.dt_fe / dx:.6f}",
        "Ceff*dt_fe/dx": f"{C / s * problem.dt_fe / dx:.6f}",
        "dt_pos/dx": "",
        "dt_pos/(s*dx)": "",
    }
    if "tvd" in results:
        row["dt_tvd/dx"] = f"{results['tvd'].normalized:.6f}"
        row["dt_tvd/(s*dx)"] = f"{results['tvd'].normalized / s:.6f}"
    if "positivity" in results:
        row["dt_pos/dx"] = f"{results['positivity'].normalized:.6f}"
        row["dt_pos/(s*dx)"] = f"{results['positivity'].normalized / s:.6f}"
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(row))
        writer.writeheader()
        writer.writerow(row)
    for prop in props:
        print(f"{prop}: dt_max/dx = {results[prop].normalized:.6f}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_convergence(args) -> int:
    if args.problem != "vdp":
        print("error: convergence studies are supported for the vdp problem", file=sys.stderr)
        return EXIT_USAGE
    method = _load_method(args.method)
    pairs = pdelab.vdp_convergence_study(method, tf=args.tf)
    slope = convergence_order(pairs)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dt", "error"])
        for dt, err in pairs:
            writer.writerow([f"{dt:.12g}", f"{err:.12e}"])
    print(f"slope: {slope:.4f}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_table1(args) -> int:
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s"] + [f"k={k}" for k in range(2, args.kmax + 1)])
        mismatches = 0
        for s in range(2, args.smax + 1):
            row = [str(s)]
            for k in range(2, args.kmax + 1):
                ceff = r_sk2(s, k) / s
                cell = f"{ceff:.5f}"
                if s <= 8 and k <= 5:
                    C = ssp_coefficient(to_spijker(gen_second_order(s, k)))
                    if abs(C - r_sk2(s, k)) > 1e-7:
                        cell += "!"
                        mismatches += 1
                row.append(cell)
            writer.writerow(row)
    print(f"wrote {args.out}")
    if mismatches:
        print(f"warning: {mismatches} generator/formula mismatches flagged with '!'")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sspmsrk",
        description="Analyze, generate, optimize, and test SSP multistep Runge-Kutta methods.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="report order and SSP properties of a method file")
    p.add_argument("method_file")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("gen-so2", help="write an optimal second-order method file")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen_so2)

    p = sub.add_parser("optimize", help="search for a method maximizing the SSP coefficient")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--starts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--r-tol", type=float, default=1e-6)
    p.add_argument("--out", required=True)
    p.add_argument("--log", default=None, help="CSV search log path")
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("run", help="integrate a problem and record monitors")
    p.add_argument("--problem", required=True, choices=sorted(_PROBLEMS))
    p.add_argument("--method", required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--tf", type=float, required=True)
    p.add_argument("--startup", default="exact", choices=["exact", "rk3_substeps"])
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("stepsearch", help="find the largest step preserving a property")
    p.add_argument("--problem", required=True, choices=sorted(_PROBLEMS))
    p.add_argument("--method", required=True)
    p.add_argument("--property", default="both", choices=["tvd", "positivity", "both"])
    p.add_argument("--resolution", type=float, default=None)
    p.add_argument("--tf", type=float, default=0.125)
    p.add_argument("--startup", default="exact", choices=["exact", "rk3_substeps"])
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_stepsearch)

    p = sub.add_parser("convergence", help="step-refinement study with fitted slope")
    p.add_argument("--problem", default="vdp")
    p.add_argument("--method", required=True)
    p.add_argument("--tf", type=float, default=4.0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_convergence)

    p = sub.add_parser("table1", help="grid of optimal second-order effective coefficients")
    p.add_argument("--smax", type=int, default=8)
    p.add_argument("--kmax", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_table1)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "smax", 0) > 16 or getattr(args, "kmax", 0) > 8:
        print("error: table1 grid is limited to smax <= 16, kmax <= 8", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
