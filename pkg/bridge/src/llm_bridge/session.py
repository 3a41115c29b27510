"""The protocol session: a stdin/stdout NDJSON loop driven by the harness.

One process serves one role for one episode. The harness opens with hello;
the bridge answers ready (carrying model name and sampling parameters, which
the harness records into the episode log); every observe is rendered into a
prompt, sent to the model, and answered with act; end closes the session.

A reply that cannot be parsed is retried with a format reminder appended.
When the budget runs out the bridge withholds act and exits nonzero, which
the harness surfaces as a protocol error for this role.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Mapping, Sequence, TextIO

from .errors import BridgeConfigError, ReplyParseError, SessionError, TemplateError
from .models import ReplyModel, build_model
from .parsing import parse_reply
from .templates import PromptTemplate, render_prompt

__all__ = ["PROTOCOL_VERSION", "DEFAULT_RETRIES", "SessionConfig", "run_session"]

PROTOCOL_VERSION = 1
DEFAULT_RETRIES = 2

EXIT_OK = 0
EXIT_SESSION = 1
EXIT_CONFIG = 2


@dataclass(frozen=True)
class SessionConfig:
    """Everything the process needs besides the wire itself."""

    model_spec: str = "stub"
    frame: str | None = None
    sampling: Mapping[str, Any] = field(default_factory=dict)
    template_dir: Path | None = None
    retries: int = DEFAULT_RETRIES
    prompt_log: Path | None = None


@dataclass(frozen=True)
class _PromptLogger:
    """Append-only capture of every prompt the session issues."""

    path: Path | None

    def log(self, role: str, period: int, frame: str, attempt: int, prompt: str) -> None:
        if self.path is None:
            return
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(f"=== role={role} period={period} frame={frame} attempt={attempt} ===\n")
            handle.write(prompt)
            if not prompt.endswith("\n"):
                handle.write("\n")
            handle.write("\n")


def _messages(stdin: TextIO, stderr: TextIO) -> Iterator[dict[str, Any] | None]:
    """Yield parsed messages; None signals an unreadable line."""
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            message = json.loads(line)
        except ValueError as exc:
            print(f"cannot parse harness message: {exc}", file=stderr)
            yield None
            return
        if not isinstance(message, dict):
            print(f"harness message must be a JSON object, got {line[:80]!r}", file=stderr)
            yield None
            return
        yield message


def _send(stdout: TextIO, message: Mapping[str, Any]) -> None:
    stdout.write(json.dumps(message, sort_keys=True, separators=(",", ":")) + "\n")
    stdout.flush()


def _reminder(channels: Sequence[str], error: ReplyParseError | None) -> str:
    reason = f" ({error})" if error is not None else ""
    return (
        f"Format reminder: your previous reply could not be used{reason}. End your"
        " reply with one line holding a single non-negative integer, or with a"
        " fenced code block containing a JSON object that maps every channel"
        f" ({', '.join(channels)}) to a non-negative integer."
    )


def _decide(
    model: ReplyModel,
    template: PromptTemplate,
    payload: Mapping[str, Any],
    channels: Sequence[str],
    role: str,
    period: int,
    retries: int,
    logger: _PromptLogger,
) -> dict[str, int]:
    """Render, query, parse; retry with a reminder until the budget is spent."""
    try:
        observation = payload["observation"]
        context = payload["context"]
        memory = payload["memory"]
    except KeyError as exc:
        raise SessionError(f"observe payload is missing {exc.args[0]!r}") from exc
    base_prompt = render_prompt(template, observation, context, memory, channels)
    error: ReplyParseError | None = None
    for attempt in range(1 + retries):
        prompt = base_prompt if attempt == 0 else base_prompt + "\n\n" + _reminder(channels, error)
        logger.log(role, period, template.frame, attempt + 1, prompt)
        reply = model.complete(prompt)
        try:
            return parse_reply(reply, channels)
        except ReplyParseError as exc:
            error = exc
    raise SessionError(
        f"no usable order for period {period} after {1 + retries} attempts: {error}"
    )


def _check_hello(message: Mapping[str, Any]) -> dict[str, Any]:
    if message.get("type") != "hello":
        raise BridgeConfigError(f"expected hello first, got {message.get('type')!r}")
    payload = message.get("payload")
    if not isinstance(payload, Mapping):
        raise BridgeConfigError("hello carries no payload object")
    version = payload.get("protocol_version")
    if version != PROTOCOL_VERSION:
        raise BridgeConfigError(
            f"protocol version mismatch: harness speaks {version!r},"
            f" this bridge speaks {PROTOCOL_VERSION}"
        )
    for key in ("env_id", "role_id", "horizon", "channels"):
        if key not in payload:
            raise BridgeConfigError(f"hello payload is missing {key!r}")
    channels = payload["channels"]
    if (
        not isinstance(channels, list)
        or not channels
        or not all(isinstance(c, str) for c in channels)
    ):
        raise BridgeConfigError(f"hello channels must be a non-empty list of names, got {channels!r}")
    return dict(payload)


def run_session(
    config: SessionConfig,
    stdin: TextIO | None = None,
    stdout: TextIO | None = None,
    stderr: TextIO | None = None,
) -> int:
    """Serve one episode over the given streams; returns the exit code."""
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr

    messages = _messages(stdin, stderr)
    first = next(messages, None)
    if first is None:
        print("no hello received on stdin", file=stderr)
        return EXIT_CONFIG
    try:
        hello = _check_hello(first)
        frame = hello.get("framing") or config.frame or "PF"
        template = PromptTemplate.load(
            frame,
            cognitive_reflection=bool(hello.get("cognitive_reflection")),
            directory=config.template_dir,
        )
        model = build_model(config.model_spec, config.sampling)
    except (BridgeConfigError, TemplateError) as exc:
        print(f"bridge config error: {exc}", file=stderr)
        return EXIT_CONFIG

    role = str(hello["role_id"])
    channels = list(hello["channels"])
    logger = _PromptLogger(config.prompt_log)
    _send(
        stdout,
        {
            "type": "ready",
            "period": 0,
            "payload": {
                "protocol_version": PROTOCOL_VERSION,
                "agent": "llm-bridge",
                "model": model.name,
                "frame": frame,
                "sampling": dict(config.sampling),
            },
        },
    )

    for message in messages:
        if message is None:
            return EXIT_SESSION
        mtype = message.get("type")
        if mtype == "end":
            return EXIT_OK
        if mtype != "observe":
            print(f"unexpected message type {mtype!r} mid-episode", file=stderr)
            return EXIT_SESSION
        period = message.get("period")
        if not isinstance(period, int) or isinstance(period, bool) or period < 1:
            print(f"observe carries a bad period: {period!r}", file=stderr)
            return EXIT_SESSION
        payload = message.get("payload")
        if not isinstance(payload, Mapping):
            print("observe carries no payload object", file=stderr)
            return EXIT_SESSION
        try:
            orders = _decide(
                model, template, payload, channels, role, period, config.retries, logger
            )
        except (SessionError, TemplateError) as exc:
            print(f"bridge session error: {exc}", file=stderr)
            return EXIT_SESSION
        _send(stdout, {"type": "act", "period": period, "payload": {"orders": orders}})

    print("harness closed the stream before end", file=stderr)
    return EXIT_SESSION
