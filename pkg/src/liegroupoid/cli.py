"""Command-line entry point.

Usage examples::

    liegroupoid list --format json
    liegroupoid verify --example heisenberg --samples 100 --tol 1e-9
    liegroupoid verify --chart-file my.chart.json
    liegroupoid extract --example heisenberg_bundle --point-u 0.5
    liegroupoid bracket --example pair --xi 1 --eta u1 --point-u 0.2
    liegroupoid invert --example affine_action --point-u 1 --point-v 0.2 0.3

Exit codes: 0 success, 1 failed verification or Newton failure, 2 usage,
parse or domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import numpy as np

from . import gallery
from .axioms import DEFAULT_TOL, _num, run_groupoid_suite
from .chart import (
    LocalGroupoidChart,
    SamplePlan,
    eval_prod,
    invert_at,
    read_chart_file,
    sample_points,
)
from .errors import ConvergenceError, GroupoidError, OutOfDomainError, ParseError
from .structure import (
    SectionSpec,
    StructureData,
    bilinear_at,
    bracket_sections_full,
    run_algebroid_suite,
    structure_data_at,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_SAMPLES = {"verify": 100, "extract": 5, "bracket": 5}


class UsageError(Exception):
    pass


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key, int(value)
    except ValueError:
        try:
            return key, float(value)
        except ValueError:
            return key, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liegroupoid",
        description="Verify Lie groupoid charts and extract their Lie algebroid structure functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="list gallery charts")
    p_list.add_argument("--format", choices=("text", "json"), default="text")

    def chart_options(p, samples=True):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--example", metavar="NAME", help="gallery chart name")
        src.add_argument("--chart-file", metavar="PATH", help="JSON chart document")
        p.add_argument(
            "--param", type=_param, action="append", default=[], metavar="KEY=VALUE",
            help="gallery parameter, e.g. dim=2 for the pair groupoid",
        )
        if samples:
            p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--format", choices=("text", "json"), default="text")

    p_verify = sub.add_parser("verify", help="run the groupoid and algebroid check suites")
    chart_options(p_verify)

    p_extract = sub.add_parser("extract", help="anchor and structure functions at base points")
    chart_options(p_extract)
    p_extract.add_argument("--point-u", type=float, nargs="*", default=None)
    p_extract.add_argument("--full", action="store_true", help="include the bilinear tensor B")
    p_extract.add_argument("--order", type=int, choices=(2, 3), default=2, help="jet order")

    p_bracket = sub.add_parser("bracket", help="bracket of two sections given by expressions in u")
    chart_options(p_bracket)
    p_bracket.add_argument("--xi", nargs="+", required=True, metavar="EXPR")
    p_bracket.add_argument("--eta", nargs="+", required=True, metavar="EXPR")
    p_bracket.add_argument("--point-u", type=float, nargs="*", default=None)

    p_invert = sub.add_parser("invert", help="inverse arrow by Newton's method")
    chart_options(p_invert, samples=False)
    p_invert.add_argument("--point-u", type=float, nargs="*", default=[])
    p_invert.add_argument("--point-v", type=float, nargs="+", required=True)
    p_invert.add_argument("--newton-tol", type=float, default=1e-12)
    p_invert.add_argument("--max-iterations", type=int, default=50)
    return parser


def load_chart(args) -> LocalGroupoidChart:
    if args.chart_file:
        if args.param:
            raise UsageError("--param only applies to --example")
        try:
            return read_chart_file(args.chart_file)
        except OSError as exc:
            raise UsageError(f"cannot read chart file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.chart_file}: invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    try:
        return gallery.get_chart(args.example, **dict(args.param))
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


def _chart_info(chart: LocalGroupoidChart) -> dict:
    return {"name": chart.name, "n": chart.n, "m": chart.m}


def _config(args, samples: Optional[int]) -> dict:
    return {"seed": args.seed, "samples": samples, "tol": args.tol}


def _samples(args) -> int:
    n = args.samples if args.samples is not None else DEFAULT_SAMPLES[args.command]
    if n < 0:
        raise UsageError("--samples must be nonnegative")
    return n


def _base_points(args, chart: LocalGroupoidChart, samples: int) -> list[np.ndarray]:
    if args.point_u is not None and (args.point_u or chart.n == 0):
        if len(args.point_u) != chart.n:
            raise UsageError(f"--point-u needs {chart.n} values, got {len(args.point_u)}")
        return [np.asarray(args.point_u, dtype=float)]
    if chart.n == 0:
        return [np.zeros(0)]
    return [u for u, _, _ in sample_points(chart, SamplePlan(args.seed, samples))]


def _fmt(x) -> str:
    return f"{x:.3e}" if isinstance(x, float) else str(x)


# commands ----------------------------------------------------------------------


def cmd_list(args, out) -> int:
    entries = [gallery.get_entry(name).describe() for name in gallery.list_entries()]
    if args.format == "json":
        print(_dump(entries), file=out)
        return EXIT_OK
    print(f"{'name':<20}{'n':>3}{'m':>3}  description", file=out)
    for e in entries:
        print(f"{e['name']:<20}{e['n']:>3}{e['m']:>3}  {e['note']}", file=out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    chart = load_chart(args)
    samples = _samples(args)
    plan = SamplePlan(args.seed, samples)
    checks = run_groupoid_suite(chart, plan, args.tol).checks + run_algebroid_suite(chart, plan, args.tol).checks
    ok = all(c.passed for c in checks)
    if args.format == "json":
        doc = {
            "chart": _chart_info(chart),
            "config": _config(args, samples),
            "checks": [c.to_dict() for c in checks],
            "structure": [],
        }
        print(_dump(doc), file=out)
    else:
        print(
            f"chart {chart.name} (n={chart.n}, m={chart.m})  seed={args.seed} samples={samples} tol={args.tol:g}",
            file=out,
        )
        print(f"{'check':<18}{'samples':>8}  {'residual':>11}  {'tolerance':>10}  result", file=out)
        for c in checks:
            mark = "PASS" if c.passed else "FAIL"
            bound = " (min)" if c.bound == "lower" else ""
            line = f"{c.name:<18}{c.samples:>8}  {_fmt(c.max_residual):>11}  {c.tolerance:>10.1e}  {mark}{bound}"
            if c.note:
                line += f"  [{c.note}]"
            print(line, file=out)
        print("ALL CHECKS PASSED" if ok else "FAILED: " + ", ".join(c.name for c in checks if not c.passed), file=out)
    return EXIT_OK if ok else EXIT_FAIL


def _structure_entry(sd: StructureData, full: bool) -> dict:
    return sd.to_dict(full=full)


def cmd_extract(args, out) -> int:
    chart = load_chart(args)
    samples = _samples(args)
    points = _base_points(args, chart, samples)
    data = [structure_data_at(chart, u, order=args.order) for u in points]
    if args.format == "json":
        doc = {
            "chart": _chart_info(chart),
            "config": _config(args, samples),
            "checks": [],
            "structure": [_structure_entry(sd, args.full) for sd in data],
        }
        print(_dump(doc), file=out)
        return EXIT_OK
    print(f"chart {chart.name} (n={chart.n}, m={chart.m})", file=out)
    for sd in data:
        print(f"u = {sd.u.tolist()}", file=out)
        print(f"  anchor a[i][j] = {sd.anchor.tolist()}", file=out)
        nz = [
            f"c_{i + 1}{j + 1}{k + 1} = {sd.c[k, i, j]:.17g}"
            for i in range(chart.m) for j in range(chart.m) for k in range(chart.m)
            if i < j and sd.c[k, i, j] != 0.0
        ]
        print("  nonzero c (i<j): " + (", ".join(nz) if nz else "none"), file=out)
        if args.full:
            print(f"  B[k][i][j] = {sd.B.tolist()}", file=out)
    return EXIT_OK


def cmd_bracket(args, out) -> int:
    chart = load_chart(args)
    if len(args.xi) != chart.m or len(args.eta) != chart.m:
        raise UsageError(f"--xi and --eta need {chart.m} expressions each")
    xi = SectionSpec.from_expressions(args.xi, chart.n)
    eta = SectionSpec.from_expressions(args.eta, chart.n)
    samples = _samples(args)
    points = _base_points(args, chart, samples)
    results = [(u, bracket_sections_full(chart, xi, eta, u)) for u in points]
    if args.format == "json":
        doc = {
            "chart": _chart_info(chart),
            "config": _config(args, samples),
            "xi": list(args.xi),
            "eta": list(args.eta),
            "brackets": [{"u": u.tolist(), "value": val.tolist()} for u, val in results],
        }
        print(_dump(doc), file=out)
    else:
        for u, val in results:
            print(f"u = {u.tolist()}  [xi, eta] = {val.tolist()}", file=out)
    return EXIT_OK


def cmd_invert(args, out) -> int:
    chart = load_chart(args)
    u = np.asarray(args.point_u, dtype=float)
    v = np.asarray(args.point_v, dtype=float)
    if u.size != chart.n or v.size != chart.m:
        raise UsageError(f"need {chart.n} u-values and {chart.m} v-values")
    try:
        res = invert_at(chart, u, v, args.newton_tol, args.max_iterations, full_output=True)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    B = bilinear_at(chart, u)
    second_order = -v + np.einsum("kij,i,j->k", B, v, v)
    expansion = float(np.max(np.abs(res.w - second_order)))
    residual = float(np.max(np.abs(eval_prod(chart, u, v, res.w, check_domain=False))))
    info = {
        "u": u.tolist(),
        "v": v.tolist(),
        "w": res.w.tolist(),
        "iterations": res.iterations,
        "residual": _num(residual),
        "expansion_residual": _num(expansion),
    }
    if args.format == "json":
        doc = {
            "chart": _chart_info(chart),
            "config": {"seed": args.seed, "samples": None, "tol": args.newton_tol},
            "inverse": info,
        }
        print(_dump(doc), file=out)
    else:
        for key, val in info.items():
            print(f"{key:<20}{val}", file=out)
    return EXIT_OK


COMMANDS = {
    "list": cmd_list,
    "verify": cmd_verify,
    "extract": cmd_extract,
    "bracket": cmd_bracket,
    "invert": cmd_invert,
}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return COMMANDS[args.command](args, out)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        if exc.source:
            print(f"  {exc.source}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, OutOfDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GroupoidError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
