"""Command-line interface: ``kahlerstar graphs | star | verify | report``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .cache import GraphCache
from .expr import ParseError, parse_expression
from .geometry import BUILTIN_CHARTS, ChartError, KahlerChart, builtin_chart, load_chart
from .graphs import describe, total_weight
from .jets import JetError
from .operator import emit_symbolic, format_latex, format_text, star_product
from .verify import DEFAULT_SEED, SUITES, run_suite, summary_table, write_jsonl

# Largest total weight enumerated without --allow-large, per number of externals.
DEFAULT_BOUNDS = {2: 4, 3: 3}
FALLBACK_BOUND = 2


def weight_bound(n: int) -> int:
    return DEFAULT_BOUNDS.get(n, FALLBACK_BOUND)


class CliError(Exception):
    pass


def _check_bound(n: int, k: int, allow_large: bool) -> None:
    bound = weight_bound(n)
    if k <= bound:
        return
    if not allow_large:
        raise CliError(f"refusing k={k} for n={n}: the bound is k <= {bound} "
                       "(pass --allow-large to override)")
    print(f"warning: k={k} exceeds the bound {bound} for n={n}; enumeration may be slow",
          file=sys.stderr)


def parse_point(text: str, m: int) -> tuple[complex, ...]:
    """``"0.3+0.1i"`` or comma-separated coordinates; one value is repeated m times."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        coords = [complex(p.replace(" ", "").replace("i", "j")) for p in parts]
    except ValueError as exc:
        raise CliError(f"cannot parse point {text!r}") from exc
    if len(coords) == 1:
        coords = coords * m
    if len(coords) != m:
        raise CliError(f"point has {len(coords)} coordinates, chart has m={m}")
    return tuple(coords)


def _chart_from_args(args) -> KahlerChart:
    if args.chart:
        chart = load_chart(args.chart)
    else:
        chart = builtin_chart(args.builtin, args.m)
    for spec in args.phi or []:
        w, _, text = spec.partition("=")
        try:
            weight = int(w)
        except ValueError as exc:
            raise CliError(f"--phi expects W=EXPR, got {spec!r}") from exc
        chart = chart.with_potential(weight, parse_expression(text, chart.m))
    return chart


def _cache(args) -> GraphCache:
    return GraphCache(args.cache_dir, enabled=not args.no_cache)


# -- graphs ---------------------------------------------------------------------


def cmd_graphs(args) -> int:
    _check_bound(args.n, args.k, args.allow_large)
    entry = _cache(args).get(args.n, args.k)
    if args.format == "json":
        print(json.dumps(entry.to_json(), sort_keys=True, indent=2))
        return 0
    rows = [("#", "weights", "edges", "|Aut|", "form")]
    for i, (g, form, aut) in enumerate(zip(entry.graphs(), entry.forms, entry.automorphisms)):
        rows.append((str(i + 1), ",".join(map(str, g.weights)) or "-", describe(g), str(aut),
                     str(form)))
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    for r in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    print(f"{len(entry.forms)} graph(s) in A_{args.n}({args.k})")
    return 0


# -- star -----------------------------------------------------------------------


def cmd_star(args) -> int:
    _check_bound(2, args.order, args.allow_large)
    if args.latex:
        for k in range(args.order + 1):
            terms = emit_symbolic(k, 2)
            if args.format == "json":
                print(json.dumps({"order": k, "terms": [t.to_json() for t in terms]},
                                 sort_keys=True, ensure_ascii=False))
            else:
                print(format_latex(terms, k))
        return 0
    if args.f1 is None or args.f2 is None:
        raise CliError("value mode needs --f1 and --f2")
    chart = _chart_from_args(args)
    f1 = parse_expression(args.f1, chart.m)
    f2 = parse_expression(args.f2, chart.m)
    point = parse_point(args.point, chart.m)
    series = star_product(chart.with_truncation(max(chart.truncation, args.order)),
                          f1, f2, point, args.order)
    coeffs = []
    for k in range(args.order + 1):
        c = series[k]
        v = complex(c.value if hasattr(c, "value") else c)
        coeffs.append({"order": k, "value": {"re": v.real, "im": v.imag}})
    if args.format == "json":
        out = {
            "chart": chart.to_json() | {"name": chart.name},
            "f1": str(f1),
            "f2": str(f2),
            "point": [{"re": z.real, "im": z.imag} for z in point],
            "coefficients": coeffs,
        }
        print(json.dumps(out, sort_keys=True, indent=2))
    else:
        print(f"# {chart.describe()}")
        print(f"# f1 = {f1}; f2 = {f2}; point = {', '.join(map(str, point))}")
        for c in coeffs:
            print(f"h^{c['order']}\t{c['value']['re']:.16g}\t{c['value']['im']:.16g}")
    return 0


# -- verify / report --------------------------------------------------------------


def _verify_chart(args) -> KahlerChart | None:
    if args.chart_name is None:
        return None
    return builtin_chart(args.chart_name, args.m)


def _progress(report) -> None:
    status = "pass" if report.passed else "FAIL"
    params = " ".join(f"{k}={v}" for k, v in report.parameters.items())
    print(f"[{status}] {report.name} {params} residual={report.max_residual:.3e}",
          file=sys.stderr, flush=True)


def cmd_verify(args) -> int:
    reports = run_suite(args.suite, args.seed, args.order, _verify_chart(args),
                        progress=None if args.quiet else _progress)
    if args.report:
        write_jsonl(reports, args.report, timings=args.timings)
    print(summary_table(reports))
    return 0 if all(r.passed for r in reports) else 1


def write_summary_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["check", "parameters", "max_residual", "tolerance", "passed", "seed"])
        for r in reports:
            params = ";".join(f"{k}={v}" for k, v in r.parameters.items())
            writer.writerow([r.name, params, repr(r.max_residual), repr(r.tolerance),
                             int(r.passed), r.seed])


def cmd_report(args) -> int:
    from .plotting import graph_gallery, residual_chart

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = run_suite(args.suite, args.seed, None, None,
                        progress=None if args.quiet else _progress)
    write_jsonl(reports, out / "reports.jsonl")
    write_summary_csv(reports, out / "summary.csv")
    residual_chart(reports, out / "residuals.png")
    cache = _cache(args)
    for k in range(args.gallery_k + 1):
        entry = cache.get(2, k)
        table = list(zip(entry.graphs(), entry.automorphisms))
        graph_gallery(table, out / f"graphs_n2_k{k}.png", title=f"A_2({k})")
        with open(out / f"graphs_n2_k{k}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["form", "aut", "weight"])
            for g, form, aut in zip(entry.graphs(), entry.forms, entry.automorphisms):
                writer.writerow([str(form), aut, total_weight(g)])
    print(summary_table(reports))
    print(f"wrote {out}")
    return 0 if all(r.passed for r in reports) else 1


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kahlerstar",
                                     description="Graph expansion of star products on Kähler charts.")
    sub = parser.add_subparsers(dest="command", required=True)

    def cache_flags(p):
        p.add_argument("--cache-dir", default=None,
                       help="enumeration cache directory (default: $KAHLERSTAR_CACHE or ~/.cache/kahlerstar)")
        p.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")

    g = sub.add_parser("graphs", help="list A_n(k) with |Aut|")
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--format", choices=("table", "json"), default="table")
    g.add_argument("--allow-large", action="store_true")
    cache_flags(g)
    g.set_defaults(func=cmd_graphs)

    s = sub.add_parser("star", help="evaluate f1 * f2 at a point, or print the symbolic terms")
    src = s.add_mutually_exclusive_group()
    src.add_argument("--builtin", choices=BUILTIN_CHARTS, default="flat")
    src.add_argument("--chart", help="chart description file (JSON)")
    s.add_argument("--m", type=int, default=1, help="dimension of a built-in chart")
    s.add_argument("--phi", action="append", metavar="W=EXPR",
                   help="add a deformation potential of weight W (repeatable)")
    s.add_argument("--f1")
    s.add_argument("--f2")
    s.add_argument("--point", default="0")
    s.add_argument("--order", type=int, default=2)
    s.add_argument("--latex", action="store_true", help="print the symbolic operator terms")
    s.add_argument("--format", choices=("table", "json"), default="table")
    s.add_argument("--allow-large", action="store_true")
    s.set_defaults(func=cmd_star)

    v = sub.add_parser("verify", help="run identity checks")
    v.add_argument("--suite", choices=("all",) + SUITES, default="all")
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--order", type=int, default=None, help="override the default order")
    v.add_argument("--chart", dest="chart_name", choices=BUILTIN_CHARTS, default=None)
    v.add_argument("--m", type=int, default=1)
    v.add_argument("--report", help="write JSON-lines reports to this file")
    v.add_argument("--timings", action="store_true", help="include runtimes in the JSON report")
    v.add_argument("--quiet", action="store_true")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="run a suite and write reports, CSV tables and figures")
    r.add_argument("--out", required=True)
    r.add_argument("--suite", choices=("all",) + SUITES, default="all")
    r.add_argument("--seed", type=int, default=DEFAULT_SEED)
    r.add_argument("--gallery-k", type=int, default=2, help="draw A_2(k) for k up to this")
    r.add_argument("--quiet", action="store_true")
    cache_flags(r)
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CliError, ChartError, JetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
