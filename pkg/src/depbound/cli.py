"""Command-line front end.

Exit codes: 0 success, 2 malformed input or usage, 3 inconsistent data or
infeasible program, 4 solver stopped at a gap or time limit, 5 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import __version__
from .core import InconsistentDataError, ObservedData, sample_mean, validate
from .estimators import naive, v1, v1_from_objective, v2, v2_from_objective, v2_prime
from .inference import ci_from_se
from .io import DataFormatError, file_digest, load_data
from .simulation import ConfigError, load_config, run_study
from .solver import (
    INFEASIBLE,
    OPTIMAL,
    InfeasibleInstanceError,
    SolverConfig,
    brute_force,
    build_v1_instance,
    build_v2_instance,
    max_v2_fast_path,
    solve,
)

EXIT_OK = 0
EXIT_DATA = 2
EXIT_INCONSISTENT = 3
EXIT_LIMIT = 4
EXIT_INTERNAL = 5

BRUTE_FORCE_MAX_N = 8
DEFAULT_ESTIMATORS = ("naive", "v1")
HOMOSKEDASTIC_ONLY = ("v2", "v2_prime")

log = logging.getLogger("depbound")


def fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.6g}"


class UsageError(ValueError):
    pass


# --- shared pieces -------------------------------------------------------

def _load(args) -> ObservedData:
    # absent degrees fall back to n-1 with a warning logged by load_data
    data = load_data(args.outcomes, args.edges, args.global_degree_bound)
    report = validate(data)
    if not report:
        raise InconsistentDataError(report)
    return data


def _solver_config(args) -> SolverConfig:
    return SolverConfig(gap=args.gap, time_limit=args.time_limit)


def _digests(args) -> dict:
    out = {"outcomes": {"path": str(args.outcomes), "sha256": file_digest(args.outcomes)}}
    if args.edges is not None:
        out["edges"] = {"path": str(args.edges), "sha256": file_digest(args.edges)}
    return out


def _edge_ids(data: ObservedData, matrix) -> list[list[str]]:
    if matrix is None:
        return []
    return [[data.label(i), data.label(j)] for i, j in sorted(matrix.edges)]


def _exit_for(status: str) -> int:
    if status == OPTIMAL:
        return EXIT_OK
    if status == INFEASIBLE:
        return EXIT_INCONSISTENT
    return EXIT_LIMIT


def _objective_result(data: ObservedData, objective: str, cfg: SolverConfig, exact: bool = False):
    instance = build_v1_instance(data) if objective == "v1" else build_v2_instance(data)
    if exact:
        return brute_force(instance)
    return solve(instance, cfg)


def _summary_lines(summary: dict) -> list[str]:
    keys = ("status", "objective", "upper_bound", "gap", "nodes", "lp_solves", "wall_time")
    return [f"{k}: {summary[k] if isinstance(summary[k], (str, int)) else fmt(summary[k])}" for k in keys]


# --- estimate --------------------------------------------------------------

def _estimate_row(name: str, data: ObservedData, cfg: SolverConfig) -> dict:
    start = time.perf_counter()
    row = {"status": OPTIMAL, "gap": 0.0, "upper_variance": None}
    if name == "naive":
        row["variance"] = naive(data).value
    elif name == "v2_prime":
        row["variance"] = v2_prime(data).value
    elif name == "v1":
        res = solve(build_v1_instance(data), cfg)
        row.update(status=res.status, gap=res.gap)
        row["variance"] = v1(res.best_matrix, data).value if res.best_matrix is not None else math.nan
        row["upper_variance"] = v1_from_objective(res.upper_bound, data)
    elif name == "v2":
        fast = max_v2_fast_path(data)
        if fast is not None:
            row["variance"] = v2(fast, data).value
            row["upper_variance"] = row["variance"]
        else:
            res = solve(build_v2_instance(data), cfg)
            row.update(status=res.status, gap=res.gap)
            row["variance"] = v2(res.best_matrix, data).value if res.best_matrix is not None else math.nan
            row["upper_variance"] = v2_from_objective(res.upper_bound, data)
    else:
        raise UsageError(f"unknown estimator {name!r}")
    row["wall_time"] = time.perf_counter() - start
    return row


def _estimator_list(args) -> list[str]:
    if args.estimators:
        names = [s.strip() for s in args.estimators.split(",") if s.strip()]
    else:
        names = list(DEFAULT_ESTIMATORS)
        if args.assume_homoskedastic:
            names += list(HOMOSKEDASTIC_ONLY)
    known = ("naive", "v1", "v2", "v2_prime")
    bad = [s for s in names if s not in known]
    if bad:
        raise UsageError(f"unknown estimator(s) {', '.join(bad)}; choose from {', '.join(known)}")
    needs = [s for s in names if s in HOMOSKEDASTIC_ONLY]
    if needs and not args.assume_homoskedastic:
        raise UsageError(f"{', '.join(needs)} require --assume-homoskedastic")
    return list(dict.fromkeys(names))


def cmd_estimate(args) -> int:
    names = _estimator_list(args)
    if not 0 < args.alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    data = _load(args)
    cfg = _solver_config(args)
    mean = sample_mean(data.outcomes)
    rows = {}
    code = EXIT_OK
    for name in names:
        row = _estimate_row(name, data, cfg)
        var = row["variance"]
        if not (var >= 0):
            # only the general estimator can go negative, through forced edges
            print(f"ERROR: {name} estimate is negative ({var!r}); no interval reported", file=sys.stderr)
            row.update(se=None, ci_lower=None, ci_upper=None)
            code = max(code, EXIT_INCONSISTENT)
        else:
            row["se"] = math.sqrt(var)
            if args.json:
                ci = ci_from_se(mean, row["se"], args.alpha)
            else:
                # printed intervals are recomputable from the printed mean and SE
                ci = ci_from_se(float(fmt(mean)), float(fmt(row["se"])), args.alpha)
            row.update(ci_lower=ci.lower, ci_upper=ci.upper)
        code = max(code, _exit_for(row["status"]))
        rows[name] = row

    report = {
        "n": data.n,
        "mean": mean,
        "estimates": rows,
        "config": {
            "alpha": args.alpha,
            "estimators": names,
            "assume_homoskedastic": args.assume_homoskedastic,
            "gap": args.gap,
            "time_limit": args.time_limit,
            "global_degree_bound": args.global_degree_bound,
            "seed": args.seed,
            "files": _digests(args),
        },
    }
    if args.json:
        print(json.dumps(report, indent=2))
        return code
    print(f"n: {data.n}")
    print(f"mean: {fmt(mean)}")
    print(f"alpha: {fmt(args.alpha)}")
    header = ("estimator", "variance", "se", "ci_lower", "ci_upper", "status", "gap", "time_s")
    table = [header]
    for name, r in rows.items():
        table.append((name, fmt(r["variance"]), fmt(r["se"]), fmt(r["ci_lower"]), fmt(r["ci_upper"]),
                      r["status"], fmt(r["gap"]), f"{r['wall_time']:.3f}"))
    widths = [max(len(t[k]) for t in table) for k in range(len(header))]
    for t in table:
        print("  ".join(c.ljust(w) for c, w in zip(t, widths)).rstrip())
    for name, r in rows.items():
        if r["status"] != OPTIMAL and r["upper_variance"] is not None:
            print(f"note: {name} stopped at {r['status']}; the maximum lies in "
                  f"[{fmt(r['variance'])}, {fmt(r['upper_variance'])}]")
    return code


# --- solve and brute-force -----------------------------------------------

def _emit_solution(args, data: ObservedData, res) -> int:
    summary = res.summary()
    edges = _edge_ids(data, res.best_matrix)
    if args.json:
        print(json.dumps({"objective_kind": args.objective, **summary, "edges": edges}, indent=2))
    else:
        print(f"objective_kind: {args.objective}")
        for line in _summary_lines(summary):
            print(line)
        print("id_i,id_j")
        for i, j in edges:
            print(f"{i},{j}")
    if getattr(args, "edges_out", None):
        with open(args.edges_out, "w") as fh:
            fh.write("id_i,id_j\n")
            fh.writelines(f"{i},{j}\n" for i, j in edges)
    return _exit_for(res.status)


def cmd_solve(args) -> int:
    data = _load(args)
    res = _objective_result(data, args.objective, _solver_config(args))
    return _emit_solution(args, data, res)


def cmd_brute_force(args) -> int:
    data = _load(args)
    if data.n > args.max_n:
        raise UsageError(f"brute force is limited to n <= {args.max_n}; got n = {data.n}")
    res = _objective_result(data, args.objective, None, exact=True)
    return _emit_solution(args, data, res)


# --- simulate --------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = type(cfg)(**{**cfg.__dict__, "seed": args.seed})
    report = run_study(cfg, threads=args.threads)
    text = report.to_json()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    failed = [k for k, ok in report.checks.items() if not ok]
    if failed:
        print(f"checks failed: {', '.join(failed)}", file=sys.stderr)
        if args.check:
            return 1
    return EXIT_OK


# --- parser ----------------------------------------------------------------

def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("outcomes", help="CSV with header id,x[,d]")
    p.add_argument("edges", nargs="?", default=None, help="CSV with header id_i,id_j (optional)")
    p.add_argument("--global-degree-bound", type=int, default=None, metavar="D",
                   help="replace every reported degree by D")
    p.add_argument("--json", action="store_true", help="machine-readable output at full precision")


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gap", type=float, default=1e-9, help="absolute optimality gap (default 1e-9)")
    p.add_argument("--time-limit", type=float, default=None, help="seconds per solve")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="depbound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="variance estimates and confidence intervals for the mean")
    _add_data_args(p)
    _add_solver_args(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--estimators", default=None,
                   help="comma-separated subset of naive,v1,v2,v2_prime")
    p.add_argument("--assume-homoskedastic", action="store_true",
                   help="also report the equal-variance estimators v2 and v2_prime")
    p.add_argument("--seed", type=int, default=None, help="recorded in the report; the solver is deterministic")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("solve", help="maximizing compatible edge set for one objective")
    _add_data_args(p)
    _add_solver_args(p)
    p.add_argument("--objective", choices=("v1", "v2"), default="v1")
    p.add_argument("--edges-out", default=None, help="also write the edge set to this file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("brute-force", help="exhaustive optimum for small samples")
    _add_data_args(p)
    p.add_argument("--objective", choices=("v1", "v2"), default="v1")
    p.add_argument("--max-n", type=int, default=BRUTE_FORCE_MAX_N, help="refuse larger samples")
    p.set_defaults(func=cmd_brute_force)

    p = sub.add_parser("simulate", help="run a Monte Carlo study from a JSON config")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None, help="override the config's master seed")
    p.add_argument("--threads", type=int, default=1, help="worker processes for replicates")
    p.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")
    p.add_argument("--check", action="store_true", help="exit nonzero when a study check fails")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.WARNING)
    try:
        return _dispatch(args)
    finally:
        log.removeHandler(handler)


def _dispatch(args) -> int:
    try:
        return args.func(args)
    except (DataFormatError, UsageError, ConfigError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InconsistentDataError as exc:
        print("error: inconsistent data", file=sys.stderr)
        for v in exc.report.violations:
            print(f"  {v.where}: {v.reason}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except InfeasibleInstanceError as exc:
        print(f"error: infeasible program: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
