"""Chat backend tests: replay matching, recording round trips, and the live
backend against a local stub server."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from trajbench.chat import (
    BackendTimeout,
    ChatError,
    ChatMessage,
    ChatParams,
    LiveBackend,
    RecordingBackend,
    ReplayBackend,
    ReplayDivergence,
    ReplayExhausted,
    ScriptedBackend,
    Transcript,
)


def msg(role, content):
    return ChatMessage(role=role, content=content)


class TestChatMessage:
    def test_rejects_unknown_role(self):
        with pytest.raises(ValueError):
            ChatMessage("tool", "x")

    def test_rejects_empty_user_content(self):
        with pytest.raises(ValueError):
            ChatMessage("user", "")


class TestReplayBackend:
    def _transcript(self):
        return Transcript(
            messages=[
                msg("user", "hello robot"),
                msg("assistant", "plan A"),
                msg("user", "result: ok"),
                msg("assistant", "plan B"),
            ],
            model="scripted", task_id="t",
        )

    def test_replay_returns_recorded_turns(self):
        backend = ReplayBackend(self._transcript())
        first = backend.chat([msg("user", "hello robot")])
        assert first == msg("assistant", "plan A")
        second = backend.chat(
            [msg("user", "hello robot"), first, msg("user", "result: ok")]
        )
        assert second == msg("assistant", "plan B")

    def test_whitespace_normalized_matching(self):
        backend = ReplayBackend(self._transcript())
        assert backend.chat([msg("user", "hello\n   robot")]).content == "plan A"

    def test_strict_mode_rejects_whitespace_edits(self):
        backend = ReplayBackend(self._transcript(), strict=True)
        with pytest.raises(ReplayDivergence):
            backend.chat([msg("user", "hello\n   robot")])

    def test_divergence_carries_first_differing_index(self):
        backend = ReplayBackend(self._transcript())
        backend.chat([msg("user", "hello robot")])
        with pytest.raises(ReplayDivergence) as err:
            backend.chat(
                [msg("user", "hello robot"), msg("assistant", "plan A"),
                 msg("user", "result: BAD")]
            )
        assert err.value.index == 2

    def test_exhausted(self):
        backend = ReplayBackend(self._transcript())
        backend.chat([msg("user", "hello robot")])
        backend.chat([msg("user", "hello robot"), msg("assistant", "plan A"),
                      msg("user", "result: ok")])
        with pytest.raises(ReplayExhausted):
            backend.chat([msg("user", "anything else")])

    def test_fresh_session_after_reset(self):
        # two sessions recorded flat: [u, a, u, a]; the second session
        # starts over with a new user message
        t = Transcript(messages=[
            msg("user", "first session"), msg("assistant", "one"),
            msg("user", "second session"), msg("assistant", "two"),
        ])
        backend = ReplayBackend(t)
        assert backend.chat([msg("user", "first session")]).content == "one"
        assert backend.chat([msg("user", "second session")]).content == "two"

    def test_pure_function_of_inputs(self):
        def run():
            backend = ReplayBackend(self._transcript())
            a = backend.chat([msg("user", "hello robot")])
            b = backend.chat([msg("user", "hello robot"), a, msg("user", "result: ok")])
            return (a, b)

        assert run() == run()


class TestRecording:
    def test_empty_session_metadata_only(self, tmp_path):
        rec = RecordingBackend(ScriptedBackend([]), model="m", task_id="t7")
        path = tmp_path / "empty.json"
        rec.save(path)
        doc = json.loads(path.read_text())
        assert doc["messages"] == []
        assert doc["model"] == "m" and doc["task_id"] == "t7"

    def test_three_turn_session_order_preserved(self):
        rec = RecordingBackend(ScriptedBackend(["r1", "r2", "r3"]))
        h = [msg("user", "q1")]
        h.append(rec.chat(h))
        h.append(msg("user", "q2"))
        h.append(rec.chat(h))
        h.append(msg("user", "q3"))
        h.append(rec.chat(h))
        contents = [m.content for m in rec.messages]
        assert contents == ["q1", "r1", "q2", "r2", "q3", "r3"]

    def test_record_then_replay_identical(self, tmp_path):
        rec = RecordingBackend(ScriptedBackend(["out one", "out two"]))
        session1 = [msg("user", "prompt alpha")]
        r1 = rec.chat(session1)
        session2 = [msg("user", "prompt beta")]
        r2 = rec.chat(session2)
        path = tmp_path / "t.json"
        rec.save(path)

        replay = ReplayBackend(Transcript.load(path))
        assert replay.chat([msg("user", "prompt alpha")]) == r1
        assert replay.chat([msg("user", "prompt beta")]) == r2

    def test_transcript_file_round_trip(self, tmp_path):
        t = Transcript(messages=[msg("user", "a"), msg("assistant", "b")],
                       model="m", task_id="x")
        p = tmp_path / "x.json"
        t.save(p)
        loaded = Transcript.load(p)
        assert loaded.messages == t.messages
        assert loaded.model == "m" and loaded.task_id == "x"


class _StubHandler(BaseHTTPRequestHandler):
    fail_next = 0
    seen_payloads = []
    seen_auth = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).seen_payloads.append(body)
        type(self).seen_auth.append(self.headers.get("Authorization"))
        if type(self).fail_next > 0:
            type(self).fail_next -= 1
            self.send_response(500)
            self.end_headers()
            return
        reply = {"choices": [{"message": {"role": "assistant", "content": "stub says hi"}}]}
        data = json.dumps(reply).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture()
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.fail_next = 0
    _StubHandler.seen_payloads = []
    _StubHandler.seen_auth = []
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestLiveBackend:
    def test_returns_stub_text(self, stub_server):
        backend = LiveBackend(stub_server, model="test-model", api_key="k")
        out = backend.chat([msg("user", "ping")])
        assert out == msg("assistant", "stub says hi")
        payload = _StubHandler.seen_payloads[0]
        assert payload["model"] == "test-model"
        assert payload["temperature"] == 0.0
        assert payload["messages"] == [{"role": "user", "content": "ping"}]

    def test_retries_transport_errors_with_backoff(self, stub_server):
        sleeps = []
        backend = LiveBackend(stub_server, model="m", api_key="k",
                              sleep=sleeps.append)
        _StubHandler.fail_next = 2
        out = backend.chat([msg("user", "ping")])
        assert out.content == "stub says hi"
        assert sleeps == [1.0, 2.0]

    def test_gives_up_after_two_retries(self, stub_server):
        backend = LiveBackend(stub_server, model="m", api_key="k", sleep=lambda s: None)
        _StubHandler.fail_next = 3
        with pytest.raises(ChatError):
            backend.chat([msg("user", "ping")])

    def test_timeout_becomes_backend_timeout(self):
        # unroutable address (TEST-NET-1) with a tiny timeout
        backend = LiveBackend("http://192.0.2.1:9", model="m", api_key="k",
                              sleep=lambda s: None)
        with pytest.raises((BackendTimeout, ChatError)):
            backend.chat([msg("user", "ping")], ChatParams(timeout=0.2))

    def test_api_key_from_environment(self, stub_server, monkeypatch):
        monkeypatch.setenv("LLM_API_KEY", "env-secret")
        backend = LiveBackend(stub_server, model="m")
        assert backend.api_key == "env-secret"
        backend.chat([msg("user", "ping")])
        assert _StubHandler.seen_auth[-1] == "Bearer env-secret"

    def test_history_validation(self, stub_server):
        backend = LiveBackend(stub_server, model="m", api_key="k")
        with pytest.raises(ValueError):
            backend.chat([])
        with pytest.raises(ValueError):
            backend.chat([msg("assistant", "i speak first")])
