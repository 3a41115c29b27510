"""Order extraction from free-form model replies.

Two-tier rule: a fenced code block holding a JSON object wins if one is
present (scanned last to first, so the model's final answer counts);
otherwise the last standalone integer in the reply is taken for the first
channel with zeros elsewhere. A fence that is valid JSON but breaks the
channel contract is an error rather than a silent fallback, so the retry
reminder can point at what was wrong.
"""

from __future__ import annotations

import json
import re
from typing import Any, Mapping, Sequence

from .errors import ReplyParseError

__all__ = ["parse_reply"]

_FENCE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)
# standalone: not glued to a word, not a decimal fragment; comma groups allowed
_INT = re.compile(r"(?<![\w.])-?\d{1,3}(?:,\d{3})+(?!\.?\d)|(?<![\w.])-?\d+(?!\.?\d)")


def _spread(qty: int, channels: Sequence[str]) -> dict[str, int]:
    if qty < 0:
        raise ReplyParseError(f"order quantity must be non-negative, got {qty}")
    return {channel: qty if i == 0 else 0 for i, channel in enumerate(channels)}


def _orders_from_mapping(data: Mapping[str, Any], channels: Sequence[str]) -> dict[str, int]:
    body = data
    if isinstance(data.get("orders"), Mapping):
        body = data["orders"]
    expected = set(channels)
    got = set(body)
    if got != expected:
        raise ReplyParseError(
            f"fenced orders must cover exactly the channels {sorted(expected)}, got {sorted(got)}"
        )
    orders = {}
    for channel in channels:
        qty = body[channel]
        if isinstance(qty, bool) or not isinstance(qty, int) or qty < 0:
            raise ReplyParseError(
                f"fenced order for channel {channel!r} must be a non-negative integer, got {qty!r}"
            )
        orders[channel] = qty
    return orders


def _orders_from_fence(block: str, channels: Sequence[str]) -> dict[str, int] | None:
    """Interpret one fenced block; None means it was not an answer at all."""
    try:
        data = json.loads(block)
    except ValueError:
        return None
    if isinstance(data, Mapping):
        return _orders_from_mapping(data, channels)
    if isinstance(data, int) and not isinstance(data, bool):
        return _spread(data, channels)
    return None


def parse_reply(text: str, channels: Sequence[str]) -> dict[str, int]:
    """Extract per-channel orders from one reply.

    Raises ReplyParseError when no order can be read; the caller owns the
    retry budget, so this function never retries on its own.
    """
    if not channels:
        raise ValueError("channels must be non-empty")
    for block in reversed(_FENCE.findall(text)):
        orders = _orders_from_fence(block, channels)
        if orders is not None:
            return orders
    found = _INT.findall(text)
    if not found:
        raise ReplyParseError("reply contains no integer quantity")
    return _spread(int(found[-1].replace(",", "")), channels)
