"""Command-line surface.

Subcommands: solve | theta | bound | gen | bench | profile.

Exit codes: 0 = converged (or command completed), 2 = iteration/time
limit reached, 3 = solver stalled or no valid bound, 1 = usage, file, or
parse errors.
"""

from __future__ import annotations

import argparse
import json
import math
import shlex
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import families
from .bounds import BoundStatus, make_bound_callback, recover_bound
from .core import read_instance, with_added_inequalities, write_instance
from .graphs import complement, read_dimacs
from .lp import ExternalLpSolver
from .profiles import (perf_profile, plot_convergence, plot_profiles,
                       read_times_csv, write_profile_csv)
from .randgen import GenSpec, generate, write_sidecar
from .relaxations import (build_theta, build_theta_bar_plus, build_theta_plus,
                          sample_triangle_cuts)
from .solver import SolverConfig, SolverStatus, solve

_RELAXATIONS = {
    "theta": build_theta,
    "theta+": build_theta_plus,
    "thetabar+": build_theta_bar_plus,
}

_STATUS_EXIT = {
    SolverStatus.CONVERGED: 0,
    SolverStatus.ITER_LIMIT: 2,
    SolverStatus.TIME_LIMIT: 2,
    SolverStatus.STALLED: 3,
}


class CliError(Exception):
    """User-facing error: message to stderr, exit 1."""


def _add_solver_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--eps", type=float, default=1e-5,
                    help="stopping tolerance on max(r_P, r_D) (default 1e-5)")
    sp.add_argument("--max-iter", type=int, default=100_000)
    sp.add_argument("--time-limit", type=float, default=None,
                    help="wall-clock limit in seconds")
    sp.add_argument("--sigma0", type=float, default=1.0,
                    help="initial penalty parameter")
    sp.add_argument("--sigma-rule", choices=["lorenz-tran-dinh", "fixed"],
                    default="lorenz-tran-dinh",
                    help="penalty update rule (default: norm-ratio adaptive)")
    sp.add_argument("--postproc-every", type=int, default=200,
                    help="bound post-processing period in iterations")
    sp.add_argument("--lp-tol", type=float, default=1e-5,
                    help="feasibility tolerance of the bound LP")
    sp.add_argument("--no-postproc", action="store_true",
                    help="disable dual-bound post-processing")
    sp.add_argument("--lp-engine", choices=["auto", "simplex", "highs"],
                    default="auto", help="LP engine for bound recovery")
    sp.add_argument("--external-cmd", default=None, metavar="TEMPLATE",
                    help="external LP solver command with {problem} and "
                         "{solution} placeholders (overrides --lp-engine)")
    sp.add_argument("--output", default=None, metavar="PATH",
                    help="write the JSON report here instead of stdout")
    sp.add_argument("--plot", default=None, metavar="PATH",
                    help="also render a convergence figure to this file")


def _config_from_args(args) -> SolverConfig:
    return SolverConfig(eps=args.eps, max_iter=args.max_iter,
                        time_limit=args.time_limit, sigma0=args.sigma0,
                        sigma_rule=args.sigma_rule,
                        postprocess_every=args.postproc_every)


def _lp_engine_from_args(args):
    if args.external_cmd:
        return ExternalLpSolver(shlex.split(args.external_cmd))
    return args.lp_engine


def _jsonable(value):
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, (np.floating, np.integer)):
        return _jsonable(float(value))
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _emit_report(report: dict, args) -> None:
    text = json.dumps(_jsonable(report), indent=2, allow_nan=False)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _bound_report(bound) -> dict | None:
    if bound is None:
        return None
    return {"status": bound.status.value, "value": bound.value,
            "feasibility_residual": bound.feasibility_residual,
            "wall_time_sec": bound.wall_time_sec, "warning": bound.warning}


def _run_and_report(sdp, args, extra: dict) -> int:
    config = _config_from_args(args)
    callback = None
    if not args.no_postproc:
        callback = make_bound_callback(tol=args.lp_tol,
                                       engine=_lp_engine_from_args(args))
    result = solve(sdp, config, bound_callback=callback)
    best = result.best_bound
    report = {
        **extra,
        "solver": "adal",
        "status": result.status.value,
        "iters": result.iterations,
        "objective": result.primal_objective,
        "dual_objective": result.dual_objective,
        "r_P": result.r_P, "r_D": result.r_D, "delta": result.delta,
        "sigma": result.sigma,
        "n": sdp.n, "m": sdp.m, "l": sdp.l,
        "best_bound": None if best is None else best.value,
        "best_bound_detail": _bound_report(best),
        "best_bound_iteration": result.best_bound_iteration,
        "bound_time_sec": result.best_bound_time,
        "total_time_sec": result.total_time,
        "factor_time_sec": result.factor_time,
        "eig_time_sec": result.eig_time,
        "postproc_time_sec": result.postproc_time,
    }
    _emit_report(report, args)
    if args.plot:
        if not result.history:
            print("nothing to plot: solver finished before iterating",
                  file=sys.stderr)
        else:
            bound_pts = [(it, b.value) for it, b in result.bound_history
                         if getattr(b, "value", None) is not None]
            plot_convergence(result.history, args.plot,
                             title=str(extra.get("instance", "")),
                             bound_points=bound_pts)
    return _STATUS_EXIT[result.status]


def cmd_solve(args) -> int:
    try:
        sdp = read_instance(args.instance)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot read instance {args.instance!r}: {exc}") from exc
    return _run_and_report(sdp, args, {"instance": Path(args.instance).stem})


def cmd_theta(args) -> int:
    try:
        if args.family:
            g = families.by_name(args.family)
            name = args.family
        else:
            path = bench_mod.resolve_data_path(args.graph)
            g = read_dimacs(str(path))
            name = Path(args.graph).stem
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot read graph: {exc}") from exc
    if args.complement:
        g = complement(g)
    sdp = _RELAXATIONS[args.relaxation](g)
    if args.cuts:
        if args.relaxation != "thetabar+":
            raise CliError("--cuts applies only to the thetabar+ relaxation")
        sdp = with_added_inequalities(
            sdp, sample_triangle_cuts(g, args.cuts, args.cut_seed))
    extra = {"instance": name, "relaxation": args.relaxation,
             "complement": bool(args.complement), "cuts": args.cuts,
             "graph_n": g.n, "graph_edges": g.edge_count}
    return _run_and_report(sdp, args, extra)


def cmd_bound(args) -> int:
    try:
        sdp = read_instance(args.instance)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot read instance {args.instance!r}: {exc}") from exc
    if args.z_file:
        try:
            z = np.load(args.z_file)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot read dual matrix {args.z_file!r}: {exc}") from exc
        if z.shape != (sdp.n, sdp.n):
            raise CliError(f"dual matrix shape {z.shape} does not match n={sdp.n}")
    else:
        config = SolverConfig(eps=args.eps, max_iter=args.max_iter,
                              time_limit=args.time_limit, sigma0=args.sigma0,
                              sigma_rule=args.sigma_rule,
                              postprocess_every=args.postproc_every)
        z = solve(sdp, config).Z
    bound = recover_bound(sdp, z, tol=args.lp_tol,
                          engine=_lp_engine_from_args(args))
    report = {"instance": Path(args.instance).stem,
              "bound": _bound_report(bound)}
    _emit_report(report, args)
    return 0 if bound.status == BoundStatus.CERTIFIED else 3


def cmd_gen(args) -> int:
    try:
        spec = GenSpec(n=args.n, m=args.m, p=args.p, density=args.density,
                       seed=args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    inst = generate(spec)
    out = Path(args.output)
    write_instance(inst.sdp, str(out))
    sidecar = out.with_suffix(".known.json")
    write_sidecar(str(sidecar), spec, inst)
    print(f"wrote {out} and {sidecar} (known optimum "
          f"{inst.known_optimum:.12g})")
    return 0


def cmd_bench(args) -> int:
    try:
        records = bench_mod.run_manifest(args.manifest, jobs=args.jobs,
                                         log_dir=args.log_dir)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot run manifest {args.manifest!r}: {exc}") from exc
    bench_mod.write_bench_csv(records, args.output)
    failures = sum(1 for r in records if r.status == "Error")
    print(f"wrote {args.output}: {len(records)} rows"
          + (f" ({failures} error rows)" if failures else ""))
    return 0


def cmd_profile(args) -> int:
    try:
        if args.times:
            instances, labels, times = read_times_csv(args.times,
                                                      fail_marker=args.fail_marker)
        else:
            records = bench_mod.read_bench_csv(args.input)
            instances, labels, times = bench_mod.times_from_records(records)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot build times matrix: {exc}") from exc
    curves = perf_profile(times, labels)
    plot_profiles(curves, args.output, title=args.title)
    if args.csv:
        write_profile_csv(curves, args.csv)
    print(f"wrote {args.output} ({len(instances)} instances, "
          f"{len(labels)} solvers)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adalsdp",
        description="First-order SDP solver with certified dual bounds and "
                    "theta-family graph relaxations.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve an instance JSON file")
    sp.add_argument("instance")
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("theta", help="solve a theta-family relaxation of a "
                                      "DIMACS graph")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="path to a DIMACS .clq/.col file")
    src.add_argument("--family", help="named graph family, e.g. c5, "
                                      "myciel4, queen6_6, hamming6-2")
    sp.add_argument("--relaxation", choices=["theta", "theta+", "thetabar+"],
                    default="theta")
    sp.add_argument("--complement", action="store_true",
                    help="complement the graph first (clique -> stable set)")
    sp.add_argument("--cuts", type=int, default=0,
                    help="number of sampled triangle cuts (thetabar+ only)")
    sp.add_argument("--cut-seed", type=int, default=0)
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_theta)

    sp = sub.add_parser("bound", help="certify a dual bound for an instance")
    sp.add_argument("instance")
    sp.add_argument("--z-file", default=None,
                    help=".npy file with a dual matrix to certify; when "
                         "omitted, a solver run supplies it")
    _add_solver_flags(sp)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("gen", help="generate a random instance with known "
                                    "optimum")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--p", type=float, default=0.5,
                    help="inequality fraction (default 0.5)")
    sp.add_argument("--density", type=int, default=4,
                    help="nonzeros per constraint matrix")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", required=True, help="instance JSON path; a "
                    "<name>.known.json sidecar is written next to it")
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("bench", help="run a benchmark manifest")
    sp.add_argument("manifest")
    sp.add_argument("--jobs", type=int, default=1,
                    help="concurrent solver processes")
    sp.add_argument("--output", default="bench.csv")
    sp.add_argument("--log-dir", default=None,
                    help="write one iteration log per run into this directory")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("profile", help="performance profiles from benchmark "
                                        "results")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="benchmark CSV from the bench command")
    src.add_argument("--times", help="raw times CSV: instance,<label>,... "
                                     "with FAIL for failures")
    sp.add_argument("--fail-marker", default="FAIL")
    sp.add_argument("--output", default="profile.svg",
                    help="figure path; format follows the extension")
    sp.add_argument("--csv", default=None,
                    help="also write curve breakpoints to this CSV")
    sp.add_argument("--title", default=None)
    sp.set_defaults(func=cmd_profile)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
