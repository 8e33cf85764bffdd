"""Command-line entry point: generate, solve, bench, render."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .bench import METHODS, BenchConfig, run_bench, solve
from .datagen import DatasetSpec, generate, read_points, write_points
from .render import render_result


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None


def cmd_generate(args):
    spec = DatasetSpec.from_dict(_load_json(args.spec))
    write_points(args.out, generate(spec))
    return 0


def cmd_solve(args):
    pts = read_points(args.input, poincare=args.poincare)
    overrides = _load_json(args.config) if args.config else None
    if args.method == "nj" and len(pts) < 3:
        raise ValueError(f"nj needs at least 3 points, got {len(pts)}")
    try:
        res = solve(pts, args.method, seed=args.seed, overrides=overrides)
    except Exception as exc:
        raise RuntimeError(f"{args.method} solver failed: {type(exc).__name__}: {exc}") from exc
    out = res.to_dict()
    if overrides:
        out["config"] = {**out["config"], "overrides": overrides}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=1)
    return 0


def cmd_bench(args):
    config = BenchConfig.from_dict(_load_json(args.config))
    rows = run_bench(config, args.out, jobs=args.jobs, artifacts_dir=args.artifacts)
    return 1 if any(r["trials"] == 0 for r in rows) else 0


def cmd_render(args):
    svg = render_result(_load_json(args.input), show_dt=args.show_dt)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="hypersteiner", description="Steiner trees in the hyperbolic plane.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a terminal set from a JSON dataset spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="build a tree over a point file")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="JSON file of solver overrides")
    p.add_argument("--poincare", action="store_true", help="input rows are Poincare-disk coordinates")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a benchmark sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--artifacts", help="directory for per-trial JSON (default: next to --out)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("render", help="draw a solve result as SVG")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--show-dt", action="store_true")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, TypeError, KeyError, RuntimeError) as exc:
        print(f"hypersteiner {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
