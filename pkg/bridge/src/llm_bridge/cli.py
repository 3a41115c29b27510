"""Command line entry point.

The process is meant to be launched by the simulation harness as an
external agent command, e.g.

    {"kind": "external", "command": ["llm-bridge", "--model", "stub:4"]}

It speaks the NDJSON agent protocol on stdin/stdout and logs problems to
stderr. Set INVBRIDGE_PROMPT_LOG to a file path to capture every prompt the
session issues.
"""

from __future__ import annotations

import argparse
import os
from pathlib import Path
from typing import Sequence

from .session import DEFAULT_RETRIES, SessionConfig, run_session
from .templates import FRAMES

__all__ = ["main"]

ENV_PROMPT_LOG = "INVBRIDGE_PROMPT_LOG"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llm-bridge",
        description=(
            "Agent-protocol adapter: renders observations into prompts,"
            " queries a language model, and answers with orders."
        ),
    )
    parser.add_argument(
        "--model",
        default="stub",
        help="model spec: 'stub', 'stub:<n>', 'stub:mute', or 'openai:<name>' (default: stub)",
    )
    parser.add_argument(
        "--frame",
        choices=FRAMES,
        default=None,
        help="prompt frame to use when the handshake does not pick one",
    )
    parser.add_argument(
        "--template-dir",
        type=Path,
        default=None,
        help="directory with replacement template files (default: packaged templates)",
    )
    parser.add_argument(
        "--retries",
        type=int,
        default=DEFAULT_RETRIES,
        help=f"re-queries after an unparseable reply (default: {DEFAULT_RETRIES})",
    )
    parser.add_argument("--temperature", type=float, default=None, help="sampling temperature")
    parser.add_argument("--top-p", type=float, default=None, help="nucleus sampling cutoff")
    parser.add_argument("--max-tokens", type=int, default=None, help="reply length cap")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.retries < 0:
        parser.error("--retries must be >= 0")
    sampling = {
        name: value
        for name, value in (
            ("temperature", args.temperature),
            ("top_p", args.top_p),
            ("max_tokens", args.max_tokens),
        )
        if value is not None
    }
    raw_log = os.environ.get(ENV_PROMPT_LOG)
    config = SessionConfig(
        model_spec=args.model,
        frame=args.frame,
        sampling=sampling,
        template_dir=args.template_dir,
        retries=args.retries,
        prompt_log=Path(raw_log) if raw_log else None,
    )
    return run_session(config)


if __name__ == "__main__":
    raise SystemExit(main())
