"""Failure taxonomy for the bridge.

Three families, matching the three exit codes: configuration problems
(exit 2), in-session failures (exit 1), and reply-parse misses, which stay
internal because the retry loop absorbs them until the budget runs out.
"""

from __future__ import annotations

__all__ = ["BridgeConfigError", "ReplyParseError", "SessionError", "TemplateError"]


class BridgeConfigError(ValueError):
    """Bad invocation: unusable flag, unknown model spec, broken template dir."""


class TemplateError(ValueError):
    """A template cannot be loaded or rendered against the given observation."""


class ReplyParseError(ValueError):
    """One model reply yielded no usable order; the session may retry."""


class SessionError(RuntimeError):
    """The session cannot continue; the process exits without sending act."""
