"""Shared builders for wire messages and observation payloads."""

from __future__ import annotations

import json
from typing import Any


def obs_payload(
    period: int = 1,
    role: str = "vendor",
    on_hand: int = 0,
    backlog: int = 0,
    last_demand: int | None = None,
    partners: dict[str, dict[str, Any]] | None = None,
) -> dict[str, Any]:
    return {
        "period": period,
        "role": role,
        "on_hand": on_hand,
        "backlog": backlog,
        "pipeline": [],
        "last_demand": last_demand,
        "cost_params": {"r": 12, "c": 3},
        "extra": {},
        "partners": partners,
    }


def hello_msg(
    channels: list[str] | None = None,
    framing: str | None = "PF",
    cognitive_reflection: bool = False,
    version: int = 1,
    role: str = "vendor",
) -> dict[str, Any]:
    return {
        "type": "hello",
        "period": 0,
        "payload": {
            "protocol_version": version,
            "env_id": "NVP",
            "role_id": role,
            "horizon": 20,
            "channels": ["order"] if channels is None else channels,
            "framing": framing,
            "info_sharing": False,
            "cognitive_reflection": cognitive_reflection,
        },
    }


def observe_msg(
    period: int = 1,
    observation: dict[str, Any] | None = None,
    context: str = "You sell a seasonal product; decide the stock to buy.",
    memory: list[dict[str, Any]] | None = None,
) -> dict[str, Any]:
    return {
        "type": "observe",
        "period": period,
        "payload": {
            "observation": obs_payload(period=period) if observation is None else observation,
            "context": context,
            "memory": [] if memory is None else memory,
        },
    }


def end_msg(horizon: int = 20) -> dict[str, Any]:
    return {"type": "end", "period": horizon + 1, "payload": {"totals": {"vendor": "-3/2"}}}


def wire(*messages: dict[str, Any]) -> str:
    return "\n".join(json.dumps(m) for m in messages) + "\n"
