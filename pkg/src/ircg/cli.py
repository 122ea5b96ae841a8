"""Command-line entry point.

Subcommands: ``solve`` (one solver from a config), ``bench`` (every solver a
config lists), ``ratefit`` (log-log slope of a trace column), ``compare``
(cross-solver summary table), ``plot`` (SVG + data sidecars), and
``oracle-selftest`` (randomized oracle battery).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import IrcgError
from .harness import oracle_selftest, run_from_config
from .trace import (
    compare,
    emit_plot,
    format_compare_table,
    rate_fit,
    read_trace,
    write_compare_csv,
)


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", required=True, help="key=value run configuration")
    p.add_argument("--out-dir", default="runs", help="directory for trace files")
    p.add_argument("--seed", type=int, default=None, help="override run.seed")
    p.add_argument("--time-limit-s", type=float, default=None, help="override run.time_limit_s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ircg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_flags(sub.add_parser("solve", help="run the configured solver"))
    _add_run_flags(sub.add_parser("bench", help="run every configured solver"))

    p = sub.add_parser("ratefit", help="fit log(value) ~ slope*log(t) on a window")
    p.add_argument("--trace", required=True)
    p.add_argument("--column", required=True,
                   help="trace column, or a *_gap column derived from the header")
    p.add_argument("--t-min", type=int, required=True)
    p.add_argument("--t-max", type=int, required=True)
    p.add_argument("--offset", type=float, default=0.0)

    p = sub.add_parser("compare", help="summarize traces per solver")
    p.add_argument("traces", nargs="+")
    p.add_argument("--out-dir", default=None, help="also write compare.csv here")

    p = sub.add_parser("plot", help="plot trace columns to an SVG")
    p.add_argument("traces", nargs="+")
    p.add_argument("--columns", required=True, help="comma-separated column names")
    p.add_argument("--out", required=True, help="output figure path (.svg)")

    p = sub.add_parser("oracle-selftest", help="randomized oracle battery")
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("solve", "bench"):
            paths = run_from_config(args.config, args.out_dir,
                                    seed=args.seed, time_limit_s=args.time_limit_s)
            for path in paths:
                print(path)
            return 0
        if args.command == "ratefit":
            fit = rate_fit(read_trace(args.trace), args.column,
                           args.t_min, args.t_max, offset=args.offset)
            print(f"column={fit.column} window=[{fit.t_min}, {fit.t_max}] "
                  f"slope={fit.slope:.6g} stderr={fit.slope_stderr:.3g} "
                  f"intercept={fit.intercept:.6g} points={fit.points_used} "
                  f"dropped={fit.dropped_nonpositive}")
            return 0
        if args.command == "compare":
            rows = compare([read_trace(p) for p in args.traces])
            print(format_compare_table(rows))
            if args.out_dir:
                out = Path(args.out_dir) / "compare.csv"
                write_compare_csv(rows, out)
                print(f"wrote {out}")
            return 0
        if args.command == "plot":
            out = emit_plot([read_trace(p) for p in args.traces],
                            [c.strip() for c in args.columns.split(",")], args.out)
            print(out)
            return 0
        if args.command == "oracle-selftest":
            results = oracle_selftest(seed=args.seed)
            failed = 0
            for name, ok, detail in results:
                print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
                failed += 0 if ok else 1
            return 1 if failed else 0
    except IrcgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
