"""Model clients behind one tiny interface: complete(prompt) -> reply text.

Two families ship. Stubs are deterministic and offline, for protocol drills
and tests. The chat client speaks the OpenAI-compatible chat-completions
shape over urllib; credentials come from environment variables only, so
they never appear in configs, logs, or process listings.
"""

from __future__ import annotations

import json
import os
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Any, Mapping, Protocol

from .errors import BridgeConfigError, SessionError

__all__ = ["ReplyModel", "StubModel", "MuteStubModel", "ChatCompletionsModel", "build_model"]

ENV_API_KEY = "INVBRIDGE_API_KEY"
ENV_API_BASE = "INVBRIDGE_API_BASE"
_FALLBACK_KEY = "OPENAI_API_KEY"
_FALLBACK_BASE = "OPENAI_BASE_URL"


class ReplyModel(Protocol):
    name: str

    def complete(self, prompt: str) -> str: ...


@dataclass(frozen=True)
class StubModel:
    """Always orders the same quantity, stated in plain prose."""

    quantity: int = 42

    @property
    def name(self) -> str:
        return f"stub:{self.quantity}"

    def complete(self, prompt: str) -> str:
        return f"I will order {self.quantity} units."


@dataclass(frozen=True)
class MuteStubModel:
    """Never names a quantity; exists to drive the retry-exhaustion path."""

    name: str = "stub:mute"

    def complete(self, prompt: str) -> str:
        return "I cannot commit to a quantity."


@dataclass(frozen=True)
class ChatCompletionsModel:
    """Minimal OpenAI-compatible chat client.

    Base URL and key are read from INVBRIDGE_API_BASE / INVBRIDGE_API_KEY
    (OPENAI_BASE_URL / OPENAI_API_KEY as fallbacks). Sampling parameters are
    sent verbatim in the request body.
    """

    model: str
    sampling: Mapping[str, Any] = field(default_factory=dict)
    base_url: str = ""
    api_key: str = ""
    timeout: float = 60.0

    @property
    def name(self) -> str:
        return f"openai:{self.model}"

    @classmethod
    def from_env(cls, model: str, sampling: Mapping[str, Any]) -> "ChatCompletionsModel":
        base = os.environ.get(ENV_API_BASE) or os.environ.get(_FALLBACK_BASE)
        key = os.environ.get(ENV_API_KEY) or os.environ.get(_FALLBACK_KEY)
        if not base:
            raise BridgeConfigError(
                f"no API base URL: set {ENV_API_BASE} (or {_FALLBACK_BASE})"
            )
        if not key:
            raise BridgeConfigError(f"no API key: set {ENV_API_KEY} (or {_FALLBACK_KEY})")
        return cls(model=model, sampling=dict(sampling), base_url=base.rstrip("/"), api_key=key)

    def complete(self, prompt: str) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            **dict(self.sampling),
        }
        request = urllib.request.Request(
            f"{self.base_url}/chat/completions",
            data=json.dumps(body).encode("utf-8"),
            headers={
                "Content-Type": "application/json",
                "Authorization": f"Bearer {self.api_key}",
            },
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                payload = json.loads(response.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            raise SessionError(f"model API returned HTTP {exc.code}: {exc.reason}") from exc
        except (urllib.error.URLError, TimeoutError, ValueError) as exc:
            raise SessionError(f"model API call failed: {exc}") from exc
        try:
            reply = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise SessionError(f"model API reply has no message content: {payload!r}") from exc
        if not isinstance(reply, str):
            raise SessionError(f"model reply content is not text: {reply!r}")
        return reply


def build_model(spec: str, sampling: Mapping[str, Any]) -> ReplyModel:
    """Instantiate a model from its spec string.

    Accepted: "stub" (orders 42), "stub:<n>", "stub:mute", "openai:<name>".
    Sampling parameters are carried along for the chat client and ignored by
    stubs; either way the session reports them in its ready payload.
    """
    if spec == "stub":
        return StubModel()
    if spec == "stub:mute":
        return MuteStubModel()
    if spec.startswith("stub:"):
        raw = spec[len("stub:") :]
        try:
            quantity = int(raw)
        except ValueError:
            raise BridgeConfigError(f"stub quantity must be an integer, got {raw!r}") from None
        if quantity < 0:
            raise BridgeConfigError(f"stub quantity must be non-negative, got {quantity}")
        return StubModel(quantity)
    if spec.startswith("openai:"):
        model = spec[len("openai:") :]
        if not model:
            raise BridgeConfigError("openai: spec needs a model name after the colon")
        return ChatCompletionsModel.from_env(model, sampling)
    raise BridgeConfigError(
        f"unknown model spec {spec!r}; use 'stub', 'stub:<n>', 'stub:mute', or 'openai:<name>'"
    )
