"""Command line entry point: ``hydrolab run|sweep|list``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments as ex
from .errors import ConfigError, HydrolabError


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hydrolab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a TOML config")
    run.add_argument("config", help="TOML file, or an experiment name for its defaults")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a parameter")
    run.add_argument("--output-dir", help="write artifacts here instead of the configured directory")
    run.add_argument("--report", action="store_true", help="also write summary.csv, summary.md and SVG plots")

    sw = sub.add_parser("sweep", help="run an experiment over values of one parameter")
    sw.add_argument("config", help="TOML file, or an experiment name for its defaults")
    sw.add_argument("--axis", required=True, help="parameter to vary")
    sw.add_argument("--values", required=True, help="comma-separated values")
    sw.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    sw.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a parameter")
    sw.add_argument("--output-dir", help="root directory for the sweep rows")

    sub.add_parser("list", help="list registered experiments and their parameters")
    return ap


def _load(spec: str, overrides) -> ex.ExperimentConfig:
    pairs = [ex.parse_override(o) for o in overrides]
    if spec in ex.REGISTRY and not Path(spec).exists():
        return ex.apply_overrides(ex.default_config(spec), pairs)
    return ex.load_config(spec, pairs)


def _print_result(result: ex.ExperimentResult) -> None:
    verdict = "PASS" if result.passed else "FAIL"
    print(f"{result.config.experiment}: {verdict} ({result.wall_clock:.1f} s)")
    if result.error:
        print(f"  error: {result.error}")
    for key in sorted(result.metrics):
        print(f"  {key} = {ex.fmt(result.metrics[key])}")
    for name, ok in result.checks.items():
        print(f"  [{'pass' if ok else 'FAIL'}] {name}")


def _list() -> None:
    for name, exp in ex.REGISTRY.items():
        tag = f" (acceptance criterion {exp.criterion})" if exp.criterion else ""
        print(f"{name}{tag}")
        for key, p in exp.params.items():
            print(f"    {key:<12} {p.kind:<10} default={p.default!r}  {p.doc}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "list":
            _list()
            return 0
        config = _load(args.config, args.set)
        out = Path(args.output_dir) if args.output_dir else None
        if args.command == "run":
            result = ex.run(config, out)
            _print_result(result)
            if args.report:
                ex.emit_report([result], (out or config.resolved_output()) / "report")
            return 0 if result.passed else 1
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        values = [ex.parse_override(f"v={v}")[1] for v in args.values.split(",") if v.strip()]
        if not values:
            raise ConfigError("--values is empty")
        res = ex.sweep(config, args.axis, values, args.jobs, out)
        for row in res.rows:
            _print_result(row)
        for name, ok in res.checks.items():
            print(f"[{'pass' if ok else 'FAIL'}] sweep: {name}")
        print(f"table: {res.table}")
        return 0 if res.passed else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HydrolabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
