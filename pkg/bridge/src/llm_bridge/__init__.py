"""Language-model adapter for the inventory-simulation agent protocol.

The bridge is an out-of-process agent: the harness launches it per role,
speaks NDJSON over stdin/stdout, and never imports it. Inside, each observe
message is rendered into a framed prompt (profit or loss wording over a
shared body), sent to a model client, and the reply is parsed back into
per-channel integer orders.
"""

from .errors import BridgeConfigError, ReplyParseError, SessionError, TemplateError
from .models import ChatCompletionsModel, MuteStubModel, StubModel, build_model
from .parsing import parse_reply
from .session import DEFAULT_RETRIES, PROTOCOL_VERSION, SessionConfig, run_session
from .templates import FRAMES, PromptTemplate, render_prompt

__version__ = "0.1.0"

__all__ = [
    "BridgeConfigError",
    "ChatCompletionsModel",
    "DEFAULT_RETRIES",
    "FRAMES",
    "MuteStubModel",
    "PROTOCOL_VERSION",
    "PromptTemplate",
    "ReplyParseError",
    "SessionConfig",
    "SessionError",
    "StubModel",
    "TemplateError",
    "build_model",
    "parse_reply",
    "render_prompt",
    "run_session",
]
