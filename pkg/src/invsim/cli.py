"""Command-line interface.

  invsim run      --config FILE [--seeds N] [--out DIR]
  invsim report   --in DIR [--format csv|json] [--out DIR]
  invsim validate --config FILE

Exit codes: 0 success, 1 episode failure (an agent or protocol fault mid
run), 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import AgentError, ConfigError, EpisodeAborted
from .harness import collect_reports, emit_table, load_config, run_batch
from .metrics import aggregate_reports

EXIT_OK = 0
EXIT_EPISODE_FAILURE = 1
EXIT_CONFIG_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invsim",
        description="Seeded inventory-management simulations with scripted and external agents.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_cmd = commands.add_parser("run", help="run an experiment config over its seed batch")
    run_cmd.add_argument("--config", required=True, help="experiment config (JSON)")
    run_cmd.add_argument(
        "--seeds",
        type=int,
        default=None,
        metavar="N",
        help="override the config's seed list with seeds 0..N-1",
    )
    run_cmd.add_argument("--out", default=None, help="output directory (overrides config out_dir)")

    report_cmd = commands.add_parser(
        "report", help="recompute metrics from episode logs and emit summary tables"
    )
    report_cmd.add_argument("--in", dest="in_dir", required=True, help="directory containing *.jsonl logs")
    report_cmd.add_argument("--format", choices=("csv", "json"), default="csv")
    report_cmd.add_argument(
        "--out", default=None, help="directory to write table files into (default: print to stdout)"
    )

    validate_cmd = commands.add_parser("validate", help="check a config without running it")
    validate_cmd.add_argument("--config", required=True, help="experiment config (JSON)")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.seeds is not None:
        if args.seeds < 1:
            raise ConfigError(f"--seeds must be >= 1, got {args.seeds}")
        config.seeds = list(range(args.seeds))
    out_dir = args.out or config.out_dir
    if out_dir is None:
        raise ConfigError("no output directory: pass --out or set out_dir in the config")
    result = run_batch(config, out_dir)
    metrics = result.aggregate["metrics"]
    avg = metrics.get("avg_cost", {}).get("mean")
    print(
        f"ran {len(result.logs)} episode(s) of {config.env_id} "
        f"({config.name}) into {out_dir}; mean avg_cost = {avg}"
    )
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    grouped = collect_reports(args.in_dir)
    table_csv, rows = emit_table(grouped)
    if args.format == "json":
        payload = []
        for (meta, reports), row in zip(grouped, rows):
            aggregate = aggregate_reports(list(reports))
            payload.append({"group": dict(meta), "summary": row, "metrics": aggregate["metrics"]})
        rendered = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"
        suffix = "json"
    else:
        rendered = table_csv
        suffix = "csv"
    if args.out is None:
        sys.stdout.write(rendered)
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        target = out / f"table.{suffix}"
        target.write_text(rendered, encoding="utf-8")
        print(f"wrote {target}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    roles = ", ".join(sorted(config.agents))
    print(
        f"config ok: env {config.env_id}, horizon {config.horizon}, "
        f"{len(config.seeds)} seed(s), roles: {roles}"
    )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "report":
            return _cmd_report(args)
        return _cmd_validate(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (EpisodeAborted, AgentError) as exc:
        print(f"episode failure: {exc}", file=sys.stderr)
        return EXIT_EPISODE_FAILURE


if __name__ == "__main__":
    sys.exit(main())
