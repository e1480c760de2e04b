"""Command-line front end: ``cantorflat <subcommand> [flags]``.

Exit codes: 0 success, 1 verification failure, 2 invalid parameters,
3 I/O error, 4 no admissible plan.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

from . import cantor, figures, geometry
from .errors import (AddressError, CantorFlatError, CertificationError, DegenerateError,
                     DomainError, NoPlanError, ParameterError, UnsupportedError)
from .evaluator import evaluate, evaluate_grid
from .geometry import ROW_TRANSITION, WITHIN_ROW, ConstructionParams
from .numerics import DEFAULT_BITS, parse_rational
from .planner import PlanRequest, plan
from .verify import run_suite

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_PARAMS = 2
EXIT_IO = 3
EXIT_NO_PLAN = 4


def _rational(text):
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError, ParameterError) as exc:
        raise argparse.ArgumentTypeError(f"expected an exact rational like 1/22, got {text!r}") from exc


def _schedule(text):
    out = []
    try:
        for item in filter(None, text.split(",")):
            r, s, eps = item.split(":")
            out.append((int(r), int(s), parse_rational(eps)))
    except (ValueError, ZeroDivisionError, ParameterError) as exc:
        raise argparse.ArgumentTypeError("schedule entries look like r:s:p/q, comma separated") from exc
    return tuple(out)


def _rows(text):
    try:
        return tuple(int(v) for v in filter(None, text.split(",")))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("row address looks like 1,3,2") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=int, default=1, help="smoothness order (default 1)")
    common.add_argument("--r", type=int, default=4, help="rectangles per row (default 4)")
    common.add_argument("--s", type=int, default=3, help="rows per rectangle (default 3)")
    common.add_argument("--eps", type=_rational, default=parse_rational("1/22"),
                        help="exact rational p/q (default 1/22)")
    common.add_argument("--schedule", type=_schedule, default=(),
                        help="per-generation overrides r:s:p/q,... starting at generation 2")
    common.add_argument("--depth", type=int, default=None, help="generation depth")
    common.add_argument("--tol", type=_rational, default=None, help="evaluation tolerance p/q")
    common.add_argument("--bits", type=int, default=DEFAULT_BITS, help="working precision in bits")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv", "svg"), default=None)

    # argparse exits with 2 on usage errors, matching the parameter exit code
    parser = argparse.ArgumentParser(prog="cantorflat", description="C^k functions flat on a Cantor set with fractal level sets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="metrics table and rectangle/gap inventory")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("eval", parents=[common], help="evaluate f at exact rationals (CSV)")
    p.add_argument("--x", type=_rational, action="append", default=[], help="evaluation point, repeatable")
    p.add_argument("--grid", nargs=3, metavar=("LO", "HI", "COUNT"), default=None,
                   help="evenly spaced points LO..HI (rationals) and their count")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("covers", parents=[common], help="generation-n covers as JSON")
    p.add_argument("--target", choices=(cantor.TARGET_A, cantor.TARGET_D, cantor.TARGET_LEVEL), default="A")
    p.add_argument("--rows", type=_rows, default=None, help="row address for level-set covers, e.g. 1,3,2")
    p.add_argument("--tight", action="store_true", help="tight level-set cover")
    p.set_defaults(func=cmd_covers)

    p = sub.add_parser("dims", parents=[common], help="closed-form and box-count dimensions")
    p.add_argument("--n-lo", type=int, default=3)
    p.add_argument("--n-hi", type=int, default=8)
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("plan", parents=[common], help="choose (r, s, eps) for a target alpha")
    p.add_argument("--alpha", type=_rational, required=True)
    p.add_argument("--eta", type=_rational, required=True)
    p.add_argument("--max-s", type=int, default=64)
    p.add_argument("--max-r", type=int, default=4096)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("figure", parents=[common], help="SVG of rectangles or of a single link")
    p.add_argument("--kind", choices=("rects", "link"), default="rects")
    p.add_argument("--gap", default=None, help="gap selector PARENT:INDEX, e.g. ':0' or '11:3'")
    p.add_argument("--link-kind", choices=(WITHIN_ROW, ROW_TRANSITION), default=WITHIN_ROW,
                   help="pick the first root gap of this kind when --gap is absent")
    p.add_argument("--true-scale", action="store_true", help="draw true heights instead of exaggerated ones")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--geometry", default=None, help="geometry.json to re-ingest; its parameters replace the flags")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def _params(args) -> ConstructionParams:
    return ConstructionParams(args.k, args.r, args.s, args.eps, args.schedule, args.bits)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_output(text: str, path) -> None:
    """Write to ``path`` atomically (temp file + rename), or stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _depth(args, default):
    depth = default if args.depth is None else args.depth
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    return depth


def cmd_build(args) -> int:
    params = _params(args)
    write_output(_json_text(geometry.geometry_dump(params, _depth(args, 2))), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    params = _params(args)
    tol = args.tol if args.tol is not None else parse_rational("1/1000000000000")
    rows = [evaluate(params, x, tol) for x in args.x]
    if args.grid is not None:
        try:
            count = int(args.grid[2])
        except ValueError as exc:
            raise ParameterError(f"grid count must be an integer, got {args.grid[2]!r}") from exc
        lo, hi = parse_rational(args.grid[0]), parse_rational(args.grid[1])
        rows.extend(res for _, res in evaluate_grid(params, lo, hi, count, tol))
    if not rows:
        raise ParameterError("give at least one --x or a --grid")
    if args.format == "json":
        text = _json_text([dict(zip(("x", "value", "error", "classification", "depth"), r.csv_row()))
                           for r in rows])
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "value", "error", "classification", "depth"])
        for res in rows:
            w.writerow(res.csv_row())
        text = buf.getvalue()
    write_output(text, args.out)
    return EXIT_OK


def cmd_covers(args) -> int:
    params = _params(args)
    if args.target == cantor.TARGET_LEVEL:
        if args.rows is None:
            raise ParameterError("level-set covers need --rows")
        gen = args.depth if args.depth is not None else len(args.rows) + 1
        cover = cantor.cover_level_set(params, args.rows, tight=args.tight, generation=gen)
    elif args.target == cantor.TARGET_A:
        cover = cantor.cover_A(params, _depth(args, 2))
    else:
        cover = cantor.cover_D(params, _depth(args, 2))
    write_output(_json_text(cover.to_json()), args.out)
    return EXIT_OK


def cmd_dims(args) -> int:
    params = _params(args)
    report = cantor.closed_form_dimensions(params, args.n_lo, args.n_hi)
    write_output(_json_text(report.to_json()), args.out)
    return EXIT_OK


def cmd_plan(args) -> int:
    req = PlanRequest(args.k, args.alpha, args.eta, args.max_s, args.max_r, args.bits)
    try:
        result = plan(req)
    except NoPlanError as exc:
        write_output(_json_text({"error": str(exc), "near_miss": exc.near_miss}), args.out)
        print(f"cantorflat: {exc}", file=sys.stderr)
        return EXIT_NO_PLAN
    write_output(_json_text(result.to_json()), args.out)
    return EXIT_OK


def cmd_figure(args) -> int:
    params = _params(args)
    if args.kind == "rects":
        svg = figures.render_rectangles(params, _depth(args, 2), exaggerate=not args.true_scale)
    else:
        if args.gap is not None:
            parent, index = figures.parse_gap_selector(args.gap)
        else:
            parent, index = figures.default_gap(params, args.link_kind)
        svg = figures.render_link(params, parent, index)
    write_output(svg, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    params = _params(args)
    geo = None
    if args.geometry is not None:
        with open(args.geometry, encoding="utf-8") as fh:
            geo = json.load(fh)
        # parameters come from the file being re-ingested
        params = ConstructionParams.from_json(geo["params"])
    report = run_suite(params, _depth(args, 6), args.seed, geo)
    write_output(_json_text(report), args.out)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CertificationError as exc:
        print(f"cantorflat: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (ParameterError, DomainError, AddressError, DegenerateError, UnsupportedError) as exc:
        print(f"cantorflat: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"cantorflat: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CantorFlatError as exc:
        print(f"cantorflat: {exc}", file=sys.stderr)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
