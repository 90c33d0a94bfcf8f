"""Command line front end: one-shot simplification and dataset runs."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import DEFAULT_CONFIG
from .expr import DEFAULT_METRIC_ORDER, Metric, ParseError, parse, to_string
from .harness import ENGINES, load_dataset, report, run_dataset
from .linear import simplify_linear
from .pipeline import simplify_general

_METRICS = {m.value: m for m in Metric}


def _metric_order(primary: str):
    first = _METRICS[primary]
    return (first,) + tuple(m for m in DEFAULT_METRIC_ORDER if m is not first)


def _read_config_file(path: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise SystemExit(f"{path}:{lineno}: expected key=value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbasim",
        description="Simplify mixed Boolean-arithmetic expressions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--engine", choices=ENGINES, default="gamba",
                       help="simba: linear core only; gamba: full pipeline")
        p.add_argument("--bits", type=int, default=64, metavar="N",
                       help="word size in bits (default 64)")
        p.add_argument("--metric", choices=sorted(_METRICS), default="nodes",
                       help="primary complexity metric (default nodes)")
        p.add_argument("--timeout-ms", type=int, default=10_000, metavar="T",
                       help="per-expression time budget")
        p.add_argument("--config", metavar="FILE",
                       help="key=value file supplying defaults for these flags")

    p_simplify = sub.add_parser("simplify", help="simplify one expression")
    p_simplify.add_argument("expression")
    common(p_simplify)

    p_run = sub.add_parser("run", help="run a dataset and report outcomes")
    p_run.add_argument("dataset")
    p_run.add_argument("--format", choices=("csv", "json"), default="csv")
    p_run.add_argument("--seed", type=int, default=DEFAULT_CONFIG.sample_seed,
                       help="seed for randomized verification")
    p_run.add_argument("--strict", action="store_true",
                       help="fail on malformed dataset lines")
    p_run.add_argument("--output", metavar="PATH", help="report file (default stdout)")
    p_run.add_argument("--timing", action="store_true",
                       help="include wall-time columns (reports are then not reproducible)")
    p_run.add_argument("--no-fail", action="store_true",
                       help="exit 0 even when some entries stay unproven")
    common(p_run)

    p_tables = sub.add_parser("gen-tables", help="regenerate the bitwise lookup tables")
    p_tables.add_argument("--out", metavar="DIR",
                          help="target directory (default: the installed data dir)")
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        raise SystemExit("--config requires a file path")
    values = _read_config_file(path)
    flags: list[str] = []
    for key, value in values.items():
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "1") and key in ("strict", "timing", "no_fail"):
            flags.append(flag)
        elif value.lower() in ("false", "0") and key in ("strict", "timing", "no_fail"):
            continue
        else:
            flags.extend([flag, value])
    # Config values go right after the subcommand so explicit flags win.
    return argv[:2] + flags + argv[2:]


def _config_from_args(args) -> "SimplifyConfig":
    from .config import SimplifyConfig

    cfg = SimplifyConfig(
        width=args.bits,
        metric_order=_metric_order(args.metric),
        time_budget_ms=args.timeout_ms,
    )
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, sample_seed=args.seed)
    return cfg


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv if argv is None else ["mbasim"] + list(argv))
    parser = _build_parser()
    argv = _apply_config_file(parser, argv)
    args = parser.parse_args(argv[1:])

    if args.command == "gen-tables":
        from . import tables

        target = Path(args.out) if args.out else Path(tables.__file__).parent / "data"
        tables.write_all(target)
        print(f"wrote bitwise tables to {target}")
        return 0

    cfg = _config_from_args(args)
    if args.command == "simplify":
        try:
            e = parse(args.expression, cfg.width)
        except ParseError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        result = simplify_linear(e, cfg) if args.engine == "simba" else \
            simplify_general(e, cfg)
        print(to_string(result))
        return 0

    # run
    try:
        entries = load_dataset(args.dataset, cfg.width, strict=args.strict)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    records, summary = run_dataset(entries, cfg, engine=args.engine)
    if args.output:
        with open(args.output, "w") as sink:
            report(records, summary, sink, fmt=args.format, timing=args.timing)
    else:
        report(records, summary, sys.stdout, fmt=args.format, timing=args.timing)
    if summary.invalid:
        print(f"warning: {summary.invalid} malformed line(s) skipped", file=sys.stderr)
    if args.no_fail:
        return 0
    return 0 if summary.unproven == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
