"""Command-line entry points: run configs, analyze CSVs, evaluate predictions."""

from __future__ import annotations

import argparse
import csv
import sys

from .experiments import (
    CFT_HEADER,
    ConfigError,
    RunConfig,
    collapse_residual,
    estimate_leak_probability,
    find_crossings,
    run,
)


def _cmd_run(args) -> int:
    config = RunConfig.from_json(args.config)
    result = run(config)
    print(f"wrote {len(result.rows)} rows to {config.output_path} "
          f"({result.wall_time_s:.2f}s)")
    if "fit" in result.metadata:
        fit = result.metadata["fit"]
        print(f"fit: time_scale={fit['time_scale']:.6g} "
              f"amplitude={fit['amplitude']} rms={fit['rms_residual']:.4g}")
    return 0


def _read_curves(path: str):
    curves: dict = {}
    with open(path) as fh:
        for row in csv.DictReader(fh):
            L = int(row["L"])
            curves.setdefault(L, []).append(
                (float(row["p"]), float(row["chi_mean"]), float(row["chi_stderr"]))
            )
    return curves


def _cmd_crossings(args) -> int:
    curves = _read_curves(args.results)
    points = find_crossings(curves)
    if not points:
        print("no crossings found")
        return 0
    for c in points:
        print(f"L={c.L_pair[0]}/{c.L_pair[1]}: p* = {c.p_star:.5f} "
              f"+- {c.stderr:.5f}")
    return 0


def _cmd_collapse(args) -> int:
    curves = _read_curves(args.results)
    resid = collapse_residual(curves, args.pc, args.nu)
    print(f"collapse residual at p_c={args.pc} nu={args.nu}: {resid:.6g}")
    return 0


def _cmd_leak(args) -> int:
    mean, stderr = estimate_leak_probability(args.L, args.samples, args.seed)
    print(f"q({args.L}) = {mean:.4f} +- {stderr:.4f}  ({args.samples} samples)")
    return 0


def _cmd_cft(args) -> int:
    config = RunConfig.from_dict({
        "experiment": "cft_tables",
        "table": args.table,
        "aspects": args.aspects,
        "r_over_L": args.r_over_l,
        "time_scale": args.time_scale,
        "master_seed": 0,
        "output_path": args.output or "cft_table.csv",
    })
    if args.output:
        result = run(config)
        print(f"wrote {len(result.rows)} rows to {args.output}")
    else:
        from .experiments import _cft_rows

        result = _cft_rows(config)
        print(",".join(CFT_HEADER))
        for row in result.rows:
            print(",".join(str(v) for v in row))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lxesim",
        description="Cross-entropy order parameter in monitored Z2 circuits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a JSON run config")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("crossings", help="pairwise curve crossings of a sweep CSV")
    p.add_argument("results")
    p.set_defaults(func=_cmd_crossings)

    p = sub.add_parser("collapse", help="scaling-collapse residual of a sweep CSV")
    p.add_argument("results")
    p.add_argument("--pc", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.set_defaults(func=_cmd_collapse)

    p = sub.add_parser("leak", help="scrambler leak probability")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_leak)

    p = sub.add_parser("cft", help="tabulate the critical predictions")
    p.add_argument("--table", choices=("obc", "pbc", "small-r"), required=True)
    p.add_argument("--aspects", type=float, nargs="+", required=True)
    p.add_argument("--r-over-l", type=float, default=1.0)
    p.add_argument("--time-scale", type=float, default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_cmd_cft)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
