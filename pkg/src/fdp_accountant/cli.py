"""Command-line front end.

Subcommands: ``compose`` (iid composition curves), ``dual`` (curve to
delta(eps) table), ``sgd`` (noisy-SGD pipeline with symmetrization),
``interpret`` (two-parameter summary), ``bench`` (per-method wall-clock
table), and ``report`` (quantile-method consistency report with figures).

Exit status: 0 on success, 1 on numeric failures, 2 on flag errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import accountant, report
from .curves import (DEFAULT_GRID_SIZE, TradeoffCurve, fixed_point,
                     primal_to_dual, read_curve_csv, write_dual_csv)
from .distributions import make_pair
from .interpreter import interpret

_PAIR_PARAMS = {
    "gaussian": ("mu",),
    "laplace": ("theta",),
    "subsampled-gaussian": ("p", "sigma"),
}


def _build_pair(kind: str, params: list[float], parser: argparse.ArgumentParser):
    names = _PAIR_PARAMS[kind]
    if len(params) != len(names):
        parser.error(f"--pair {kind} needs {len(names)} --param value(s): "
                     + ", ".join(names))
    return make_pair(kind.replace("-", "_"), **dict(zip(names, params)))


def _resolve_grid(flag_value: int | None) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get("FDP_GRID_SIZE")
    if env:
        return int(env)
    return DEFAULT_GRID_SIZE


def _open_out(path: str | None):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _write_columns(path: str | None, header: list[str], columns: list[np.ndarray]) -> None:
    fh, close = _open_out(path)
    try:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")
    finally:
        if close:
            fh.close()


def _emit_curves(args, curves: dict[str, TradeoffCurve]) -> None:
    names = list(curves)
    alphas = curves[names[0]].alphas
    if args.format == "json":
        payload = {"alpha": alphas.tolist()}
        for name in names:
            key = "beta" if len(names) == 1 else f"beta_{name}"
            payload[key] = curves[name].betas.tolist()
        fh, close = _open_out(args.out)
        try:
            json.dump(payload, fh)
            fh.write("\n")
        finally:
            if close:
                fh.close()
    else:
        header = ["alpha"] + (["beta"] if len(names) == 1
                              else [f"beta_{n}" for n in names])
        _write_columns(args.out, header, [alphas] + [curves[n].betas for n in names])


def _cmd_compose(args, parser) -> int:
    pair = _build_pair(args.pair, args.param, parser)
    grid = _resolve_grid(args.grid)
    methods = list(accountant.METHODS) if args.method == "all" else [args.method]
    curves = {
        m: accountant.compose_iid(pair, args.n, m, grid_size=grid,
                                  degree=args.degree,
                                  inverse_method=args.inverse)
        for m in methods
    }
    _emit_curves(args, curves)
    return 0


def _cmd_sgd(args, parser) -> int:
    grid = _resolve_grid(args.grid)
    curve = accountant.sgd_privacy(args.n, args.p, args.sigma, args.method,
                                   grid_size=grid, degree=args.degree,
                                   inverse_method=args.inverse)
    _emit_curves(args, {args.method: curve})
    return 0


def _cmd_dual(args, parser) -> int:
    curve = read_curve_csv(args.infile)
    eps_grid = np.linspace(args.eps_min, args.eps_max, args.eps_grid)
    dual = primal_to_dual(curve, eps_grid)
    fh, close = _open_out(args.out)
    try:
        if close:
            write_dual_csv(dual, args.out)
        else:
            fh.write("eps,delta\n")
            for e, d in zip(dual.epsilons, dual.deltas):
                fh.write(f"{e:.17g},{d:.17g}\n")
    finally:
        if close:
            fh.close()
    return 0


def _cmd_interpret(args, parser) -> int:
    curve = read_curve_csv(args.infile)
    params = interpret(curve)
    payload = {
        "mu_star": params.mu_star,
        "gamma": params.gamma,
        "alpha_star": fixed_point(curve),
    }
    fh, close = _open_out(args.out)
    try:
        json.dump(payload, fh)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    return 0


def bench_runtimes(pair, n_list, methods=accountant.METHODS,
                   grid_size: int = 2001, repeats: int = 1) -> list[tuple[str, int, float]]:
    """Best-of-``repeats`` wall-clock seconds per (method, n) curve."""
    rows = []
    for method in methods:
        for n in n_list:
            best = float("inf")
            for _ in range(repeats):
                start = time.perf_counter()
                accountant.compose_iid(pair, n, method, grid_size=grid_size)
                best = min(best, time.perf_counter() - start)
            rows.append((method, n, best))
    return rows


def _cmd_bench(args, parser) -> int:
    pair = _build_pair(args.pair, args.param, parser)
    n_list = [int(tok) for tok in args.n_list.split(",") if tok]
    if not n_list:
        parser.error("--n-list must contain at least one integer")
    grid = _resolve_grid(args.grid)
    rows = bench_runtimes(pair, n_list, grid_size=grid, repeats=args.repeats)
    fh, close = _open_out(args.out)
    try:
        fh.write("method,n,seconds\n")
        for method, n, seconds in rows:
            fh.write(f"{method},{n},{seconds:.6f}\n")
    finally:
        if close:
            fh.close()
    return 0


def _cmd_report(args, parser) -> int:
    n_values = [int(tok) for tok in args.n_list.split(",") if tok]
    summary = report.quantile_method_report(args.out_dir, n_values=n_values,
                                            theta_scale=args.theta_scale,
                                            grid_size=_resolve_grid(args.grid))
    print(f"report written to {args.out_dir} "
          f"({len(summary['runs'])} run(s), see summary.json)")
    return 0


def _add_output_flags(sub, default_format="csv"):
    sub.add_argument("--out", help="output file (default: stdout)")
    sub.add_argument("--format", choices=("csv", "json"), default=default_format)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdp",
        description="Composition accounting for f-differential privacy.")
    subs = parser.add_subparsers(dest="command", required=True)

    compose = subs.add_parser("compose", help="compose an iid pair n-fold")
    compose.add_argument("--pair", required=True, choices=sorted(_PAIR_PARAMS))
    compose.add_argument("--param", required=True, type=float, nargs="+",
                         help="pair parameters: mu | theta | p sigma")
    compose.add_argument("--n", required=True, type=int)
    compose.add_argument("--method", default="edgeworth",
                         choices=("clt", "edgeworth", "exact", "all"))
    compose.add_argument("--degree", type=int, default=2, choices=(0, 1, 2))
    compose.add_argument("--inverse", default="numeric",
                         choices=("numeric", "cf"))
    compose.add_argument("--grid", type=int, default=None,
                         help="alpha grid size (env FDP_GRID_SIZE, then 10001)")
    _add_output_flags(compose)
    compose.set_defaults(func=_cmd_compose)

    dual = subs.add_parser("dual", help="convert a curve CSV to delta(eps)")
    dual.add_argument("--in", dest="infile", required=True)
    dual.add_argument("--eps-min", type=float, default=-10.0)
    dual.add_argument("--eps-max", type=float, default=10.0)
    dual.add_argument("--eps-grid", type=int, default=2001)
    dual.add_argument("--out", help="output file (default: stdout)")
    dual.set_defaults(func=_cmd_dual)

    sgd = subs.add_parser("sgd", help="noisy-SGD bound with symmetrization")
    sgd.add_argument("--n", required=True, type=int)
    sgd.add_argument("--p", required=True, type=float)
    sgd.add_argument("--sigma", required=True, type=float)
    sgd.add_argument("--method", default="edgeworth",
                     choices=("clt", "edgeworth", "exact"))
    sgd.add_argument("--degree", type=int, default=2, choices=(0, 1, 2))
    sgd.add_argument("--inverse", default="numeric", choices=("numeric", "cf"))
    sgd.add_argument("--grid", type=int, default=None)
    _add_output_flags(sgd)
    sgd.set_defaults(func=_cmd_sgd)

    interp = subs.add_parser("interpret", help="two-parameter summary of a curve")
    interp.add_argument("--in", dest="infile", required=True)
    interp.add_argument("--out", help="output file (default: stdout)")
    interp.set_defaults(func=_cmd_interpret)

    bench = subs.add_parser("bench", help="wall-clock table per method and n")
    bench.add_argument("--pair", required=True, choices=sorted(_PAIR_PARAMS))
    bench.add_argument("--param", required=True, type=float, nargs="+")
    bench.add_argument("--n-list", required=True,
                       help="comma-separated composition counts, e.g. 2,4,8")
    bench.add_argument("--grid", type=int, default=2001)
    bench.add_argument("--repeats", type=int, default=1)
    bench.add_argument("--out", help="output file (default: stdout)")
    bench.set_defaults(func=_cmd_bench)

    rep = subs.add_parser("report",
                          help="quantile-method consistency report with figures")
    rep.add_argument("--out-dir", required=True)
    rep.add_argument("--n-list", default="2,100")
    rep.add_argument("--theta-scale", type=float, default=3.0)
    rep.add_argument("--grid", type=int, default=2001)
    rep.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # Map the 'cf' flag spelling onto the engine name.
    if getattr(args, "inverse", None) == "cf":
        args.inverse = "cornish_fisher"
    try:
        return args.func(args, parser)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
