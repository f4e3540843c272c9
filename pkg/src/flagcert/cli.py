"""Command-line entry point: every pipeline stage as a subcommand.

Exit codes: 0 computed/verified, 1 verification failed, 2 usage error,
3 solver non-convergence.  All configuration is visible in the invocation
(flags, or an optional key=value file); the only environment variable read
is FLAGCERT_THREADS.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from fractions import Fraction
from pathlib import Path

from .graphs import (
    enumerate_graphs,
    format_edge_list,
    format_graph_line,
)
from .flags import enumerate_types
from .densities import build_density_table
from .sdp import (
    ObjectiveSpec,
    SdpProblem,
    SolverError,
    build_problem,
    export_sdpa,
    export_solution,
    import_solution,
    solve,
)
from .certify import (
    certificate_from_json,
    certificate_to_json,
    check_published_margins,
    round_solution,
    rounding_margin_report,
    verify_certificate,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3


def _add_build_options(p: argparse.ArgumentParser):
    p.add_argument("-t", type=int, default=4, choices=(3, 4),
                   help="clique order of the objective")
    p.add_argument("-l", "--order", type=int, default=None,
                   help="expansion order (default 6 for t=4, 3 for t=3)")
    p.add_argument("--type-order", type=int, default=None,
                   help="order of the types (default 4 for t=4, 1 for t=3)")
    p.add_argument("--type-index", type=int, action="append", default=None,
                   help="restrict to these type indices (repeatable)")
    p.add_argument("--parities", choices=("both", "plus", "minus"),
                   default="both")
    p.add_argument("--no-sharing", action="store_true",
                   help="one matrix per type instead of complement pairs")


def _spec_from_args(args) -> ObjectiveSpec:
    order = args.order if args.order is not None else (6 if args.t == 4 else 3)
    type_order = args.type_order if args.type_order is not None \
        else (4 if args.t == 4 else 1)
    types = enumerate_types(type_order)
    if args.type_index is not None:
        types = tuple(types[i] for i in args.type_index)
    parities = {"both": ("+", "-"), "plus": ("+",), "minus": ("-",)}[args.parities]
    return ObjectiveSpec(args.t, order, tuple(types), parities,
                         complement_sharing=not args.no_sharing)


def _add_solver_options(p: argparse.ArgumentParser):
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--sdpa", metavar="PATH",
                   help="export the problem in SDPA sparse form and stop")
    p.add_argument("--solution", metavar="PATH",
                   help="import an externally computed solution instead of solving")


def _add_round_options(p: argparse.ArgumentParser):
    p.add_argument("--denominator", type=int, default=10 ** 10,
                   help="rounding grid for matrix entries")
    p.add_argument("--shrink", type=float, default=-1e-6,
                   help="bound candidates must stay below lambda - shrink")
    p.add_argument("--bound", type=Fraction, default=None,
                   help="certify this exact rational bound (e.g. 1/35)")
    p.add_argument("-o", "--output", metavar="PATH",
                   help="certificate JSON output path")


def _solve_or_import(problem: SdpProblem, args):
    if args.solution:
        return import_solution(problem, args.solution)
    return solve(problem, tol=args.tol, max_iter=args.max_iter)


def _run_pipeline(args, default_bound=None, denominator=None, out=None):
    """build -> solve/import -> round -> verify; prints the certified bound."""
    problem = build_problem(_spec_from_args(args))
    if args.sdpa:
        export_sdpa(problem, args.sdpa)
        print(f"exported SDPA problem to {args.sdpa}")
        return EXIT_OK
    sol = _solve_or_import(problem, args)
    print(f"numerical bound: {sol.lambda_:.9f} "
          f"({sol.iterations} iterations, gap {sol.gap:.1e})")
    bound = args.bound if args.bound is not None else default_bound
    cert = round_solution(problem, sol,
                          denominator or args.denominator,
                          shrink=args.shrink, bound=bound)
    margin = rounding_margin_report(problem, sol, cert)
    print(f"rounding: headroom {margin['bound_headroom']:.3e}, "
          f"perturbation <= {margin['rounding_perturbation_bound']:.3e}")
    report = verify_certificate(cert)
    target = out or args.output
    if target:
        Path(target).write_text(certificate_to_json(cert))
        print(f"certificate written to {target}")
    if not report.verified:
        print(f"verification FAILED (min slack {report.min_slack()})")
        return EXIT_VERIFY_FAILED
    print(f"certified bound: {cert.bound}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_enumerate(args):
    graphs = enumerate_graphs(args.n)
    for g in graphs:
        print(format_graph_line(g) if args.long else format_edge_list(g))
    return EXIT_OK


def cmd_types(args):
    for i, sigma in enumerate(enumerate_types(args.k)):
        print(f"{i}\t{format_graph_line(sigma.graph)}")
    return EXIT_OK


def cmd_densities(args):
    order = args.order if args.order is not None else 6
    type_order = args.type_order if args.type_order is not None else 4
    types = enumerate_types(type_order)
    indices = args.type_index if args.type_index is not None else range(len(types))
    cache_dir = None if args.no_cache else Path(args.cache_dir)
    for i in indices:
        table = build_density_table(types[i], order, cache_dir=cache_dir,
                                    use_cache=not args.no_cache)
        digest = hashlib.sha256()
        for key in sorted(table.entries):
            digest.update(f"{key}={table.entries[key]};".encode())
        dim = 1 << types[i].k
        print(f"type {i} order {order}: {dim}x{dim}x{len(table.entries) // dim**2}"
              f" entries sha256 {digest.hexdigest()[:16]}")
    return EXIT_OK


def cmd_build(args):
    problem = build_problem(_spec_from_args(args))
    if args.sdpa:
        export_sdpa(problem, args.sdpa)
        print(f"exported SDPA problem to {args.sdpa}")
    else:
        dims = ", ".join(f"{b.block_id}:{b.dim}" for b in problem.blocks)
        print(f"{len(problem.graphs)} constraints; blocks {dims}")
        for note in problem.pruned:
            print(f"note: {note}")
    return EXIT_OK


def cmd_solve(args):
    problem = build_problem(_spec_from_args(args))
    if args.sdpa:
        export_sdpa(problem, args.sdpa)
        print(f"exported SDPA problem to {args.sdpa}")
        return EXIT_OK
    sol = _solve_or_import(problem, args)
    print(f"lambda: {sol.lambda_:.12f}")
    print(f"iterations: {sol.iterations}  gap: {sol.gap:.2e}  "
          f"pfeas: {sol.pfeas:.2e}  dfeas: {sol.dfeas:.2e}")
    if args.save_solution:
        export_solution(problem, sol, args.save_solution)
        print(f"solution written to {args.save_solution}")
    return EXIT_OK


def cmd_round(args):
    problem = build_problem(_spec_from_args(args))
    sol = _solve_or_import(problem, args)
    cert = round_solution(problem, sol, args.denominator,
                          shrink=args.shrink, bound=args.bound)
    text = certificate_to_json(cert)
    if args.output:
        Path(args.output).write_text(text)
        print(f"certificate at bound {cert.bound} written to {args.output}")
    else:
        print(text)
    return EXIT_OK


def cmd_verify(args):
    cert = certificate_from_json(Path(args.certificate).read_text())
    report = verify_certificate(cert)
    if args.report:
        Path(args.report).write_text(report.to_tsv())
    psd_ok = all(v.is_psd for _, v in report.psd)
    print(f"bound: {cert.bound}")
    print(f"blocks PSD: {psd_ok} ({len(report.psd)} blocks)")
    print(f"min slack: {report.min_slack()}")
    print(f"verified: {report.verified}")
    return EXIT_OK if report.verified else EXIT_VERIFY_FAILED


def cmd_report(args):
    rep = check_published_margins()
    print(f"reference margins: max deviation {rep['max_deviation']:.2e} "
          f"({'within' if rep['all_within'] else 'OUTSIDE'} 5e-5)")
    if args.certificate:
        cert = certificate_from_json(Path(args.certificate).read_text())
        report = verify_certificate(cert)
        tsv = report.to_tsv()
        if args.output:
            Path(args.output).write_text(tsv)
            print(f"slack table written to {args.output}")
        else:
            sys.stdout.write(tsv)
        return EXIT_OK if report.verified else EXIT_VERIFY_FAILED
    return EXIT_OK if rep["all_within"] else EXIT_VERIFY_FAILED


def cmd_goodman(args):
    args.t = 3
    args.order = 3
    args.type_order = 1
    args.type_index = None
    args.parities = "plus"
    args.no_sharing = True
    return _run_pipeline(args, default_bound=None,
                         denominator=args.denominator)


def cmd_m4(args):
    args.t = 4
    args.order = 6
    args.type_order = 4
    args.type_index = None
    args.parities = "both"
    return _run_pipeline(args, default_bound=Fraction(1, 35),
                         denominator=args.denominator)


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _apply_config_file(argv: list[str]) -> list[str]:
    """Prepend key=value pairs from --config FILE as --key value flags."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        raise SystemExit(EXIT_USAGE)
    extra = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        extra.extend([f"--{key.strip()}", value.strip()])
    return argv[:idx] + extra + argv[idx + 2:]


def make_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="flagcert",
        description="flag-algebra SDP bounds on monochromatic clique "
                    "densities, with exact rational certificates")
    top.add_argument("--threads", type=int,
                     default=int(os.environ.get("FLAGCERT_THREADS", "1")),
                     help="worker cap for table construction (the exact "
                          "tables build in well under a second at these "
                          "sizes, so work is not split below 1s of load)")
    top.add_argument("--cache-dir", default=".flagcert-cache")
    top.add_argument("--no-cache", action="store_true")
    top.add_argument("--config", metavar="FILE",
                     help="key=value file providing additional flags")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list graph classes of one order")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--long", action="store_true",
                   help="include the 'order:' header on each line")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("types", help="list type classes of one order")
    p.add_argument("-k", type=int, required=True)
    p.set_defaults(func=cmd_types)

    p = sub.add_parser("densities", help="build averaged pair-density tables")
    p.add_argument("-l", "--order", type=int, default=None)
    p.add_argument("--type-order", type=int, default=None)
    p.add_argument("--type-index", type=int, action="append", default=None)
    p.set_defaults(func=cmd_densities)

    p = sub.add_parser("build", help="assemble the SDP (optionally export)")
    _add_build_options(p)
    p.add_argument("--sdpa", metavar="PATH")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="solve the SDP numerically")
    _add_build_options(p)
    _add_solver_options(p)
    p.add_argument("--save-solution", metavar="PATH")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("round", help="round a solution to a rational certificate")
    _add_build_options(p)
    _add_solver_options(p)
    _add_round_options(p)
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("verify", help="verify a certificate exactly")
    p.add_argument("certificate")
    p.add_argument("--report", metavar="PATH", help="write the slack TSV here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="reference-margin comparison and slack TSV")
    p.add_argument("--certificate", metavar="PATH")
    p.add_argument("-o", "--output", metavar="PATH")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("goodman",
                       help="full 3-clique pipeline; certifies the 1/4 bound")
    _add_solver_options(p)
    _add_round_options(p)
    p.set_defaults(func=cmd_goodman, denominator=10 ** 4)

    p = sub.add_parser("m4",
                       help="full 4-clique pipeline; certifies a bound >= 1/35")
    _add_solver_options(p)
    _add_round_options(p)
    p.add_argument("--no-sharing", action="store_true")
    p.set_defaults(func=cmd_m4)
    return top


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config_file(argv)
    except OSError as exc:
        print(f"config file error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
