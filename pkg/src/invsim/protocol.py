"""Language-neutral agent wire protocol: newline-delimited JSON messages.

Every message is one line: {"type": t, "period": p, "payload": {...}} with
five types. The harness sends hello, observe, and end; the agent answers
ready and act. The handshake (hello/ready) completes before period 1; each
observe must be answered by an act for the same period.

  hello    payload: protocol_version, env_id, role_id, horizon, channels,
           framing, info_sharing, cognitive_reflection
  ready    payload: free-form session info; may echo protocol_version
  observe  payload: observation, context, memory
  act      payload: orders (channel -> non-negative integer)
  end      payload: totals; period is horizon + 1

Violations carry one of five distinct error codes: timeout, malformed_json,
schema_violation, stream_closed, version_mismatch. A violation aborts the
episode; the kernel never substitutes a default order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping

from .episode import EpisodeIntro
from .errors import AgentError

__all__ = [
    "ERROR_CODES",
    "ERROR_MALFORMED",
    "ERROR_SCHEMA",
    "ERROR_CLOSED",
    "ERROR_TIMEOUT",
    "ERROR_VERSION",
    "Message",
    "PROTOCOL_VERSION",
    "ProtocolViolation",
    "build_end",
    "build_hello",
    "build_observe",
    "encode_message",
    "parse_message",
    "validate_act",
    "validate_ready",
]

PROTOCOL_VERSION = 1

MESSAGE_TYPES = ("hello", "ready", "observe", "act", "end")

ERROR_TIMEOUT = "timeout"
ERROR_MALFORMED = "malformed_json"
ERROR_SCHEMA = "schema_violation"
ERROR_CLOSED = "stream_closed"
ERROR_VERSION = "version_mismatch"

ERROR_CODES = (ERROR_TIMEOUT, ERROR_MALFORMED, ERROR_SCHEMA, ERROR_CLOSED, ERROR_VERSION)


class ProtocolViolation(AgentError):
    """A wire-protocol failure with one of the five distinct error codes."""


@dataclass(frozen=True)
class Message:
    type: str
    period: int
    payload: Mapping[str, Any]


def encode_message(message: Message) -> str:
    """One canonical JSON line, newline-terminated."""
    return (
        json.dumps(
            {"type": message.type, "period": message.period, "payload": message.payload},
            sort_keys=True,
            separators=(",", ":"),
            allow_nan=False,
        )
        + "\n"
    )


def parse_message(line: str) -> Message:
    """Parse and structurally validate one wire line.

    Raises ProtocolViolation with code malformed_json when the line is not
    JSON at all, schema_violation when it is JSON of the wrong shape.
    """
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolViolation(f"not valid JSON: {exc}", code=ERROR_MALFORMED) from None
    if not isinstance(data, dict):
        raise ProtocolViolation(
            f"message must be a JSON object, got {type(data).__name__}", code=ERROR_SCHEMA
        )
    missing = {"type", "period", "payload"} - set(data)
    if missing:
        raise ProtocolViolation(f"message missing fields {sorted(missing)}", code=ERROR_SCHEMA)
    mtype = data["type"]
    if mtype not in MESSAGE_TYPES:
        raise ProtocolViolation(f"unknown message type {mtype!r}", code=ERROR_SCHEMA)
    period = data["period"]
    if isinstance(period, bool) or not isinstance(period, int) or period < 0:
        raise ProtocolViolation(f"period must be an integer >= 0, got {period!r}", code=ERROR_SCHEMA)
    payload = data["payload"]
    if not isinstance(payload, dict):
        raise ProtocolViolation("payload must be a JSON object", code=ERROR_SCHEMA)
    return Message(type=mtype, period=period, payload=payload)


def validate_ready(message: Message) -> dict[str, Any]:
    """Check the handshake reply; returns the session-info payload."""
    if message.type != "ready":
        raise ProtocolViolation(
            f"expected ready to answer hello, got {message.type!r}", code=ERROR_SCHEMA
        )
    if message.period != 0:
        raise ProtocolViolation(
            f"ready must carry period 0, got {message.period}", code=ERROR_SCHEMA
        )
    echoed = message.payload.get("protocol_version")
    if echoed is not None and echoed != PROTOCOL_VERSION:
        raise ProtocolViolation(
            f"agent speaks protocol version {echoed!r}, harness speaks {PROTOCOL_VERSION}",
            code=ERROR_VERSION,
        )
    return dict(message.payload)


def validate_act(message: Message, period: int) -> dict[str, int]:
    """Check an act reply for the given period; returns the orders mapping.

    Channel-set agreement with the environment is enforced by the kernel;
    this layer guarantees the orders are a JSON object of non-negative
    integers for the right period.
    """
    if message.type != "act":
        raise ProtocolViolation(
            f"expected act for period {period}, got {message.type!r}", code=ERROR_SCHEMA
        )
    if message.period != period:
        raise ProtocolViolation(
            f"act period {message.period} does not match observe period {period}",
            code=ERROR_SCHEMA,
        )
    orders = message.payload.get("orders")
    if not isinstance(orders, dict) or not orders:
        raise ProtocolViolation("act payload must carry a non-empty orders object", code=ERROR_SCHEMA)
    for channel, qty in orders.items():
        if isinstance(qty, bool) or not isinstance(qty, int) or qty < 0:
            raise ProtocolViolation(
                f"order for channel {channel!r} must be a non-negative integer, got {qty!r}",
                code=ERROR_SCHEMA,
            )
    return dict(orders)


def build_hello(intro: EpisodeIntro) -> Message:
    return Message(
        type="hello",
        period=0,
        payload={
            "protocol_version": PROTOCOL_VERSION,
            "env_id": intro.env_id,
            "role_id": intro.role,
            "horizon": intro.horizon,
            "channels": list(intro.channels),
            "framing": intro.framing,
            "info_sharing": intro.info_sharing,
            "cognitive_reflection": intro.cognitive_reflection,
        },
    )


def build_observe(
    period: int,
    observation: Mapping[str, Any],
    context: str,
    memory: list[dict[str, Any]],
) -> Message:
    return Message(
        type="observe",
        period=period,
        payload={"observation": dict(observation), "context": context, "memory": memory},
    )


def build_end(horizon: int, totals: Mapping[str, Any]) -> Message:
    return Message(type="end", period=horizon + 1, payload={"totals": dict(totals)})
