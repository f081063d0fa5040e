"""Command line front end.

Every invocation is a single batch run: resolve, fetch or reuse the
cache, transform, write, exit. Data goes to stdout or the path given;
diagnostics go to stderr. Exit codes: 0 success, 1 pipeline failure
(the first token of the stderr line names the error variant), 2 usage,
3 a cache miss while offline.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .api import get_jts
from .errors import CacheMiss, PipelineError
from .fetch import FileCache
from .geo import GeoTable
from .registry import Registry, default_registry
from .render import ChoroplethSpec, LineChartSpec, choropleth, line_chart


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jtskit",
        description="Journey time statistics: fetch, clean, export, draw.",
    )
    parser.add_argument(
        "--registry", metavar="PATH", help="catalog JSON to use instead of the built-in one"
    )
    parser.add_argument(
        "--cache-dir", metavar="PATH", help="download cache directory (default honours JTSKIT_CACHE_DIR)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="show catalog entries")
    p_list.add_argument("query", nargs="?", help="substring to search code, title and purpose")
    p_list.add_argument("--family", help="restrict to one family, e.g. jts05")
    p_list.set_defaults(func=cmd_list)

    p_fetch = sub.add_parser("fetch", help="download tables into the cache")
    p_fetch.add_argument("tables", nargs="+", metavar="TABLE", help="table codes")
    _policy_flags(p_fetch)
    p_fetch.set_defaults(func=cmd_fetch)

    p_convert = sub.add_parser("convert", help="clean one sheet and write CSV or Parquet")
    _table_flags(p_convert)
    p_convert.add_argument(
        "--out", metavar="PATH", help=".csv or .parquet; omit for CSV on stdout"
    )
    _policy_flags(p_convert)
    p_convert.set_defaults(func=cmd_convert)

    p_map = sub.add_parser("map", help="draw a choropleth SVG")
    _table_flags(p_map)
    p_map.add_argument("--value", required=True, help="numeric column to colour by")
    p_map.add_argument("--out", required=True, metavar="PATH", help="output SVG path")
    p_map.add_argument("--classes", type=int, default=7)
    p_map.add_argument(
        "--method", choices=("quantile", "equal_interval"), default="quantile"
    )
    p_map.add_argument("--cap", type=float, help="treat values above this as this")
    p_map.add_argument("--title", help="title text drawn on the map")
    _policy_flags(p_map)
    p_map.set_defaults(func=cmd_map)

    p_chart = sub.add_parser("chart", help="draw a line chart SVG")
    _table_flags(p_chart)
    p_chart.add_argument("--x", required=True, help="column for the x axis")
    p_chart.add_argument(
        "--y",
        required=True,
        action="append",
        metavar="COLUMN",
        help="series column, repeatable",
    )
    p_chart.add_argument("--out", required=True, metavar="PATH", help="output SVG path")
    p_chart.add_argument("--title", help="title text drawn on the chart")
    _policy_flags(p_chart)
    p_chart.set_defaults(func=cmd_chart)

    return parser


def _table_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("table", nargs="?", metavar="TABLE", help="table code, e.g. jts0501")
    sub.add_argument("--family", help="table family, e.g. jts05 (alternative to a code)")
    sub.add_argument("--purpose", help="service purpose within the family, e.g. employment")
    sub.add_argument("--sheet", help="sheet to read, usually a year")


def _policy_flags(sub: argparse.ArgumentParser) -> None:
    group = sub.add_mutually_exclusive_group()
    group.add_argument(
        "--offline", action="store_true", help="never touch the network; cache only"
    )
    group.add_argument(
        "--refresh", action="store_true", help="re-download even when cached"
    )


def _policy(args: argparse.Namespace) -> str:
    if getattr(args, "offline", False):
        return "offline"
    if getattr(args, "refresh", False):
        return "refresh"
    return "prefer_cache"


def _registry(args: argparse.Namespace) -> Registry:
    if args.registry:
        return Registry.load(args.registry)
    return default_registry()


def _cache(args: argparse.Namespace) -> FileCache:
    return FileCache(root=args.cache_dir) if args.cache_dir else FileCache()


def _table_kwargs(args: argparse.Namespace) -> dict:
    return {
        "table_code": args.table,
        "family": args.family,
        "purpose": args.purpose,
        "sheet": args.sheet,
    }


def cmd_list(args: argparse.Namespace) -> int:
    registry = _registry(args)
    specs = registry.list_tables(args.family) if args.family else registry.list_tables()
    if args.query:
        needle = args.query.lower()
        specs = [
            s
            for s in specs
            if needle in s.table_code.lower()
            or needle in s.title.lower()
            or (s.purpose is not None and needle in s.purpose.lower())
        ]
    for spec in specs:
        print(f"{spec.table_code}\t{spec.purpose or ''}\t{spec.title}")
    return 0


def cmd_fetch(args: argparse.Namespace) -> int:
    registry = _registry(args)
    cache = _cache(args)
    policy = _policy(args)
    for code in args.tables:
        spec = registry.lookup(code)
        entry = cache.fetch(registry.source(spec.source_ref), policy=policy)
        print(entry.path)
    return 0


def cmd_convert(args: argparse.Namespace) -> int:
    out = Path(args.out) if args.out else None
    if out is not None and out.suffix not in (".csv", ".parquet"):
        print(
            f"cannot tell the format of {out.name!r}: use .csv or .parquet",
            file=sys.stderr,
        )
        return 2
    table = get_jts(
        **_table_kwargs(args),
        policy=_policy(args),
        registry=_registry(args),
        cache=_cache(args),
    )
    print(f"rows={table.n_rows} cols={table.n_cols}", file=sys.stderr)
    if out is None:
        sys.stdout.buffer.write(table.to_csv())
    elif out.suffix == ".csv":
        table.to_csv(out)
    else:
        table.to_columnar(out)
    return 0


def cmd_map(args: argparse.Namespace) -> int:
    geo_table = get_jts(
        **_table_kwargs(args),
        geo=True,
        policy=_policy(args),
        registry=_registry(args),
        cache=_cache(args),
    )
    assert isinstance(geo_table, GeoTable)
    table = geo_table.table
    print(f"rows={table.n_rows} cols={table.n_cols}", file=sys.stderr)
    print(
        f"matched={geo_table.matched} unmatched={table.n_rows - geo_table.matched}",
        file=sys.stderr,
    )
    spec = ChoroplethSpec(
        classes=args.classes, method=args.method, cap=args.cap, title=args.title
    )
    choropleth(geo_table, args.value, spec, path=args.out)
    return 0


def cmd_chart(args: argparse.Namespace) -> int:
    table = get_jts(
        **_table_kwargs(args),
        policy=_policy(args),
        registry=_registry(args),
        cache=_cache(args),
    )
    print(f"rows={table.n_rows} cols={table.n_cols}", file=sys.stderr)
    series = [name for chunk in args.y for name in chunk.split(",") if name]
    spec = LineChartSpec(title=args.title)
    line_chart(table, args.x, series, spec, path=args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CacheMiss as err:
        print(str(err), file=sys.stderr)
        return 3
    except PipelineError as err:
        print(str(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
