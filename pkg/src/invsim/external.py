"""Transports that drive external agents over the wire protocol.

Two transports ship: a subprocess speaking the protocol on stdin/stdout
(the primary path) and an HTTP endpoint receiving one POST per message.
Both map failures onto the protocol's distinct error codes and never
invent a default action: a failed exchange aborts the episode upstream.
"""

from __future__ import annotations

import queue
import shlex
import socket
import subprocess
import threading
import urllib.error
import urllib.request
from collections import deque
from typing import Any, Mapping

from .envs import Action, make_env
from .envs.base import Observation
from .episode import EpisodeIntro, MemoryWindow, SimConfig
from .errors import ConfigError
from .protocol import (
    ERROR_CLOSED,
    ERROR_TIMEOUT,
    Message,
    ProtocolViolation,
    build_end,
    build_hello,
    build_observe,
    encode_message,
    parse_message,
    validate_act,
    validate_ready,
)

__all__ = ["ExternalAgent", "HttpTransport", "SubprocessTransport", "build_external_agent"]

DEFAULT_TIMEOUT = 120.0

_EOF = object()


class SubprocessTransport:
    """Line protocol over a child process's stdin/stdout.

    stdout is drained by a reader thread so receives can time out without
    blocking; stderr is captured and attached to failure diagnostics.
    """

    def __init__(self, command: list[str] | str) -> None:
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not argv:
            raise ConfigError("external agent command is empty")
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ConfigError(f"cannot launch external agent {argv!r}: {exc}") from None
        self._lines: queue.Queue[Any] = queue.Queue()
        self._stderr: deque[str] = deque(maxlen=20)
        self._reader = threading.Thread(target=self._drain, daemon=True)
        self._reader.start()
        self._err_reader = threading.Thread(target=self._drain_stderr, daemon=True)
        self._err_reader.start()

    def _drain(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(_EOF)

    def _drain_stderr(self) -> None:
        assert self._proc.stderr is not None
        for line in self._proc.stderr:
            self._stderr.append(line.rstrip("\n"))

    def stderr_tail(self) -> str:
        return "\n".join(self._stderr)

    def exchange(self, outbound: str, timeout: float, expect_reply: bool = True) -> str | None:
        try:
            assert self._proc.stdin is not None
            self._proc.stdin.write(outbound)
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError, ValueError):
            raise ProtocolViolation(
                "agent process closed its input stream", code=ERROR_CLOSED
            ) from None
        if not expect_reply:
            return None
        try:
            item = self._lines.get(timeout=timeout)
        except queue.Empty:
            raise ProtocolViolation(
                f"agent did not reply within {timeout} seconds", code=ERROR_TIMEOUT
            ) from None
        if item is _EOF:
            tail = self.stderr_tail()
            detail = f"; agent stderr: {tail}" if tail else ""
            raise ProtocolViolation(
                f"agent closed its output stream mid-episode{detail}", code=ERROR_CLOSED
            )
        return item

    def close(self) -> None:
        for stream in (self._proc.stdin,):
            try:
                if stream is not None:
                    stream.close()
            except Exception:
                pass
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait(timeout=5)


class HttpTransport:
    """One POST per protocol message; the response body is the reply line."""

    def __init__(self, url: str) -> None:
        if not url.startswith(("http://", "https://")):
            raise ConfigError(f"external agent url must be http(s), got {url!r}")
        self.url = url

    def exchange(self, outbound: str, timeout: float, expect_reply: bool = True) -> str | None:
        request = urllib.request.Request(
            self.url,
            data=outbound.encode("utf-8"),
            headers={"Content-Type": "application/x-ndjson"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=timeout) as response:
                body = response.read().decode("utf-8")
        except socket.timeout:
            raise ProtocolViolation(
                f"endpoint did not reply within {timeout} seconds", code=ERROR_TIMEOUT
            ) from None
        except urllib.error.HTTPError as exc:
            raise ProtocolViolation(
                f"endpoint returned HTTP {exc.code}", code=ERROR_CLOSED
            ) from None
        except urllib.error.URLError as exc:
            if isinstance(exc.reason, socket.timeout):
                raise ProtocolViolation(
                    f"endpoint did not reply within {timeout} seconds", code=ERROR_TIMEOUT
                ) from None
            raise ProtocolViolation(
                f"endpoint unreachable: {exc.reason}", code=ERROR_CLOSED
            ) from None
        if not expect_reply:
            return None
        if not body.strip():
            raise ProtocolViolation("endpoint returned an empty reply", code=ERROR_CLOSED)
        return body

    def close(self) -> None:
        return None


class ExternalAgent:
    """Adapts one protocol session to the kernel's agent interface.

    Holds a render-only environment instance so each observe message can
    carry the natural-language context for the agent's current observation;
    rendering reads only static env parameters.
    """

    def __init__(self, transport, config: SimConfig, timeout: float = DEFAULT_TIMEOUT) -> None:
        self._transport = transport
        self._timeout = timeout
        self._renderer = make_env(config.env_id, config.env_params, config.horizon, config.seed)
        self._horizon = config.horizon

    def start(self, intro: EpisodeIntro) -> Mapping[str, Any]:
        reply = self._exchange_message(build_hello(intro))
        return validate_ready(reply)

    def decide(self, obs: Observation, memory: MemoryWindow) -> Action:
        message = build_observe(
            obs.period,
            obs.to_payload(),
            self._renderer.render_context(obs),
            memory.to_payload(),
        )
        reply = self._exchange_message(message)
        orders = validate_act(reply, obs.period)
        return Action(orders=orders)

    def finish(self, totals: Mapping[str, Any]) -> None:
        self._transport.exchange(
            encode_message(build_end(self._horizon, totals)), self._timeout, expect_reply=False
        )

    def close(self) -> None:
        self._transport.close()

    def _exchange_message(self, message: Message) -> Message:
        line = self._transport.exchange(encode_message(message), self._timeout)
        assert line is not None
        return parse_message(line)


def build_external_agent(params: Mapping[str, Any], config: SimConfig | None = None):
    """Factory for {"kind": "external", ...} agent specs.

    Exactly one of command (argv list or shell-quoted string, run as a
    subprocess) or url (HTTP endpoint) must be given. timeout is in seconds.
    """
    command = params.get("command")
    url = params.get("url")
    if (command is None) == (url is None):
        raise ConfigError("external agent needs exactly one of command or url")
    timeout = params.get("timeout", DEFAULT_TIMEOUT)
    if isinstance(timeout, bool) or not isinstance(timeout, (int, float)) or timeout <= 0:
        raise ConfigError(f"timeout must be a positive number of seconds, got {timeout!r}")
    if config is None:
        raise ConfigError("external agents need the simulation config for context rendering")
    transport = SubprocessTransport(command) if command is not None else HttpTransport(url)
    return ExternalAgent(transport, config, float(timeout))
