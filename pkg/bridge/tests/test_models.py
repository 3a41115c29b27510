import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from llm_bridge import (
    BridgeConfigError,
    ChatCompletionsModel,
    MuteStubModel,
    SessionError,
    StubModel,
    build_model,
)


class TestStubs:
    def test_default_quantity(self):
        model = build_model("stub", {})
        assert isinstance(model, StubModel)
        assert model.name == "stub:42"
        assert model.complete("whatever prompt") == "I will order 42 units."

    def test_explicit_quantity(self):
        model = build_model("stub:7", {"temperature": 0.9})
        assert model.name == "stub:7"
        assert "7" in model.complete("")

    def test_same_reply_for_any_prompt(self):
        model = StubModel(4)
        assert model.complete("a") == model.complete("completely different")

    def test_mute_stub_reply_has_no_digits(self):
        model = build_model("stub:mute", {})
        assert isinstance(model, MuteStubModel)
        assert not re.search(r"\d", model.complete("decide now"))

    @pytest.mark.parametrize("spec", ["stub:x", "stub:-1", "stub:4.5", "openai:", "gpt-x", ""])
    def test_bad_specs(self, spec):
        with pytest.raises(BridgeConfigError):
            build_model(spec, {})


class TestChatClientEnv:
    def test_missing_base_url(self, monkeypatch):
        for name in ("INVBRIDGE_API_BASE", "INVBRIDGE_API_KEY", "OPENAI_BASE_URL", "OPENAI_API_KEY"):
            monkeypatch.delenv(name, raising=False)
        with pytest.raises(BridgeConfigError, match="INVBRIDGE_API_BASE"):
            build_model("openai:small-model", {})

    def test_missing_key(self, monkeypatch):
        monkeypatch.setenv("INVBRIDGE_API_BASE", "http://127.0.0.1:9")
        for name in ("INVBRIDGE_API_KEY", "OPENAI_API_KEY"):
            monkeypatch.delenv(name, raising=False)
        with pytest.raises(BridgeConfigError, match="INVBRIDGE_API_KEY"):
            build_model("openai:small-model", {})


class _Endpoint(BaseHTTPRequestHandler):
    """Fake chat-completions endpoint; each test sets the class response."""

    status = 200
    body: dict = {}
    seen: list = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        type(self).seen.append(
            {
                "path": self.path,
                "auth": self.headers.get("Authorization"),
                "body": json.loads(self.rfile.read(length)),
            }
        )
        payload = json.dumps(type(self).body).encode("utf-8")
        self.send_response(type(self).status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture()
def endpoint(monkeypatch):
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Endpoint)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _Endpoint.status = 200
    _Endpoint.body = {"choices": [{"message": {"content": "I choose 9"}}]}
    _Endpoint.seen = []
    monkeypatch.setenv("INVBRIDGE_API_BASE", f"http://127.0.0.1:{server.server_port}/v1")
    monkeypatch.setenv("INVBRIDGE_API_KEY", "sk-test")
    yield _Endpoint
    server.shutdown()
    server.server_close()


class TestChatClient:
    def test_round_trip_and_request_shape(self, endpoint):
        model = build_model("openai:small-model", {"temperature": 0.25, "max_tokens": 64})
        assert isinstance(model, ChatCompletionsModel)
        assert model.name == "openai:small-model"
        assert model.complete("what is your order?") == "I choose 9"
        (request,) = endpoint.seen
        assert request["path"] == "/v1/chat/completions"
        assert request["auth"] == "Bearer sk-test"
        assert request["body"]["model"] == "small-model"
        assert request["body"]["messages"] == [
            {"role": "user", "content": "what is your order?"}
        ]
        assert request["body"]["temperature"] == 0.25
        assert request["body"]["max_tokens"] == 64

    def test_http_error_is_a_session_error(self, endpoint):
        endpoint.status = 500
        model = build_model("openai:small-model", {})
        with pytest.raises(SessionError, match="HTTP 500"):
            model.complete("hello")

    def test_shapeless_reply_is_a_session_error(self, endpoint):
        endpoint.body = {"nope": 1}
        model = build_model("openai:small-model", {})
        with pytest.raises(SessionError, match="no message content"):
            model.complete("hello")

    def test_non_text_content_is_a_session_error(self, endpoint):
        endpoint.body = {"choices": [{"message": {"content": 17}}]}
        model = build_model("openai:small-model", {})
        with pytest.raises(SessionError, match="not text"):
            model.complete("hello")

    def test_unreachable_endpoint(self, monkeypatch):
        monkeypatch.setenv("INVBRIDGE_API_BASE", "http://127.0.0.1:1/v1")
        monkeypatch.setenv("INVBRIDGE_API_KEY", "sk-test")
        model = ChatCompletionsModel(
            model="small-model", base_url="http://127.0.0.1:1/v1", api_key="sk-test", timeout=0.5
        )
        with pytest.raises(SessionError, match="failed"):
            model.complete("hello")
