"""Command line entry points: validate, run, replay, report.

Log verbosity is controlled by the single environment variable PACSIM_LOG
(debug, info, warning, error; default warning).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import PacsimError
from .metering import render_report_text, report
from .scenario import (
    ConfigParseError,
    ConfigValidationError,
    load_call_records,
    load_scenario,
    parse_cost_table,
    replay,
    run,
)

log = logging.getLogger("pacsim")


def _configure_logging() -> None:
    level = os.environ.get("PACSIM_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(message)s")


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        config = load_scenario(args.config)
    except ConfigParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except ConfigValidationError as exc:
        for violation in exc.violations:
            print(f"invalid: {violation}", file=sys.stderr)
        return 1
    print(
        f"ok: {len(config.agents)} agents, {len(config.accounts)} accounts, "
        f"{len(config.transactions)} transactions"
    )
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_scenario(args.config)
    except (ConfigParseError, ConfigValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.cost_table:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        from dataclasses import replace

        raw = tomllib.loads(Path(args.cost_table).read_text(encoding="utf-8"))
        config = replace(config, cost_table=parse_cost_table(raw))
    result = run(config, args.out, parallel=args.parallel)
    for outcome in result.outcomes:
        line = f"{outcome.end_to_end_id}: {outcome.status.value}"
        if outcome.failure_reason:
            line += f" ({outcome.failure_reason})"
        print(line)
    print(f"artifacts written to {result.out_dir}")
    return result.exit_code


def _cmd_replay(args: argparse.Namespace) -> int:
    trail = Path(args.trail).read_text(encoding="utf-8")
    snapshot = Path(args.snapshot).read_text(encoding="utf-8")
    try:
        final = replay(trail, snapshot)
    except PacsimError as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(final)
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    records = load_call_records(args.records)
    sys.stdout.write(render_report_text(report(records)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pacsim",
        description="Deterministic cross-border payment settlement simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario config, reporting every violation")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("run", help="execute a scenario and write all artifacts")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--cost-table", help="TOML cost table overriding the defaults")
    p.add_argument(
        "--parallel",
        action="store_true",
        help="run ledger-disjoint transactions concurrently (same outputs)",
    )
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("replay", help="rebuild the final snapshot from an audit trail")
    p.add_argument("trail")
    p.add_argument("snapshot", help="initial snapshot the trail starts from")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("report", help="print the gas table for a records file")
    p.add_argument("records", help="gas_records.jsonl produced by a run")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
