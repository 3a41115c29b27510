"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations

__all__ = ["SimError", "ConfigError", "AgentError", "EpisodeAborted"]


class SimError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SimError, ValueError):
    """Invalid simulation or experiment configuration."""


class AgentError(SimError):
    """An agent failed to produce a usable decision.

    code is a machine-readable reason; protocol transports use the wire
    error codes (timeout, malformed_json, schema_violation, stream_closed,
    version_mismatch), scripted agents use "agent_fault".
    """

    def __init__(self, message: str, code: str = "agent_fault") -> None:
        super().__init__(message)
        self.code = code


class EpisodeAborted(SimError):
    """Episode terminated early; identifies the failing period and agent."""

    def __init__(self, message: str, *, period: int, role: str, code: str) -> None:
        super().__init__(message)
        self.period = period
        self.role = role
        self.code = code
