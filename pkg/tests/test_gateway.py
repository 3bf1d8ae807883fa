from __future__ import annotations

import http.server
import json
import threading

import pytest

from connectgen.gateway import (
    ChatMessage,
    ChatRequest,
    Gateway,
    LabelMissing,
    MalformedResponse,
    PipelineTranscript,
    ProviderUnavailable,
    RemoteProvider,
    ScriptedProvider,
    ScriptExhausted,
    TransportError,
    extract_labeled_block,
    load_transcript,
    request_key,
    save_transcript,
)


def _req(text="hello", system="be brief"):
    return ChatRequest(
        messages=(ChatMessage("system", system), ChatMessage("user", text)),
    )


class TestTypes:
    def test_message_roles(self):
        with pytest.raises(ValueError):
            ChatMessage("narrator", "hi")
        with pytest.raises(ValueError):
            ChatMessage("user", "")

    def test_request_needs_messages(self):
        with pytest.raises(ValueError):
            ChatRequest(messages=())

    def test_request_temperature_nonnegative(self):
        with pytest.raises(ValueError):
            ChatRequest(messages=(ChatMessage("user", "x"),), temperature=-0.5)

    def test_default_temperature_is_one(self):
        assert _req().temperature == 1.0


class TestScriptedProvider:
    def test_fifo_order(self):
        gw = Gateway(ScriptedProvider(["A", "B"]))
        assert gw.complete(_req()).response_text == "A"
        assert gw.complete(_req()).response_text == "B"

    def test_exhaustion_raises_provider_unavailable(self):
        gw = Gateway(ScriptedProvider([]))
        with pytest.raises(ProviderUnavailable):
            gw.complete(_req())

    def test_exhaustion_is_not_retried(self):
        calls = []
        gw = Gateway(ScriptedProvider([]), sleep=calls.append)
        with pytest.raises(ScriptExhausted):
            gw.complete(_req())
        assert calls == []

    def test_keyed_responses(self):
        keyed = {request_key(_req("what color?")): "blue"}
        provider = ScriptedProvider(["fallback"], keyed=keyed)
        gw = Gateway(provider)
        assert gw.complete(_req("what color?")).response_text == "blue"
        assert gw.complete(_req("other")).response_text == "fallback"

    def test_keyed_by_raw_text(self):
        provider = ScriptedProvider([], keyed={"what color?": "blue"})
        assert Gateway(provider).complete(_req("what color?")).response_text == "blue"


class _FlakyProvider:
    """Raises TransportError a fixed number of times, then answers."""

    def __init__(self, failures, answer="ok"):
        self.failures = failures
        self.answer = answer
        self.calls = 0

    def send(self, req):
        self.calls += 1
        if self.calls <= self.failures:
            raise TransportError(f"boom {self.calls}")
        return self.answer


class TestRetries:
    def test_two_failures_then_success_gives_attempt_3(self):
        sleeps = []
        gw = Gateway(_FlakyProvider(2), sleep=sleeps.append, clock=lambda: 0.0)
        gw.begin_transcript("t")
        exchange = gw.complete(_req())
        assert exchange.attempt == 3
        assert exchange.response_text == "ok"
        assert len(sleeps) == 2
        assert 0.8 <= sleeps[0] <= 1.2  # 1s plus jitter
        assert 1.6 <= sleeps[1] <= 2.4  # 2s plus jitter

    def test_transcript_keeps_failed_attempts(self):
        gw = Gateway(_FlakyProvider(2), sleep=lambda s: None, clock=lambda: 0.0)
        transcript = gw.begin_transcript("t")
        gw.complete(_req())
        assert len(transcript.exchanges) == 3
        assert [e.error for e in transcript.exchanges] == ["boom 1", "boom 2", None]
        assert [e.attempt for e in transcript.exchanges] == [1, 2, 3]

    def test_exhausted_retries_raise(self):
        gw = Gateway(_FlakyProvider(99), sleep=lambda s: None, clock=lambda: 0.0)
        transcript = gw.begin_transcript("t")
        with pytest.raises(ProviderUnavailable):
            gw.complete(_req())
        assert len(transcript.exchanges) == 3
        assert all(e.error for e in transcript.exchanges)

    def test_empty_response_is_malformed(self):
        gw = Gateway(ScriptedProvider(["   "]))
        transcript = gw.begin_transcript("t")
        with pytest.raises(MalformedResponse):
            gw.complete(_req())
        assert transcript.exchanges[-1].error == "empty response"


class TestExtractLabeledBlock:
    def test_basic_delimiter_parse(self):
        text = "STORY: once upon\nCATEGORY: FISH"
        assert extract_labeled_block(text, "CATEGORY") == "FISH"
        assert extract_labeled_block(text, "STORY") == "once upon"

    def test_label_missing(self):
        with pytest.raises(LabelMissing):
            extract_labeled_block("STORY: x", "WORDS")

    def test_repeated_label_returns_first_and_warns(self, caplog):
        text = "CATEGORY: FISH\nCATEGORY: BIRDS"
        with caplog.at_level("WARNING"):
            assert extract_labeled_block(text, "CATEGORY") == "FISH"
        assert any("appears 2 times" in r.message for r in caplog.records)

    def test_multiline_content_runs_to_next_label(self):
        text = "STORY: a tale\nof two cities\nWORDS: a, b"
        assert extract_labeled_block(text, "STORY") == "a tale\nof two cities"

    def test_case_insensitive_label_argument(self):
        assert extract_labeled_block("WORDS: a, b", "words") == "a, b"

    def test_labels_with_digits_and_spaces(self):
        text = "GROUP 1 CATEGORY: FISH\nGROUP 1 WORDS: a, b, c, d"
        assert extract_labeled_block(text, "GROUP 1 WORDS") == "a, b, c, d"


class TestTranscriptPersistence:
    def test_round_trip(self, tmp_path):
        gw = Gateway(ScriptedProvider(["A", "B"]))
        transcript = gw.begin_transcript("run-1")
        gw.complete(_req("one"))
        gw.complete(_req("two"))
        path = tmp_path / "t.jsonl"
        save_transcript(transcript, path)
        loaded = load_transcript(path)
        assert loaded.id == "run-1"
        assert loaded.created_at == transcript.created_at
        assert loaded.exchanges == transcript.exchanges

    def test_scripted_runs_are_byte_identical(self, tmp_path):
        outputs = []
        for run in range(2):
            gw = Gateway(ScriptedProvider(["A", "B"]))
            gw.begin_transcript("run")
            gw.complete(_req("one"))
            gw.complete(_req("two"))
            path = tmp_path / f"t{run}.jsonl"
            save_transcript(gw.transcript, path)
            outputs.append(path.read_bytes())
        assert outputs[0] == outputs[1]


class _ChatHandler(http.server.BaseHTTPRequestHandler):
    """Canned chat-completions endpoint: two 429s, then an echo of the model."""

    hits = []

    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        type(self).hits.append(body)
        if len(type(self).hits) <= 2:
            self.send_response(429)
            self.end_headers()
            return
        payload = {
            "choices": [
                {"message": {"role": "assistant", "content": f"echo:{body['model']}"}}
            ]
        }
        raw = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def log_message(self, *args):
        pass


@pytest.fixture
def chat_server():
    _ChatHandler.hits = []
    server = http.server.HTTPServer(("127.0.0.1", 0), _ChatHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/v1/chat/completions"
    server.shutdown()


class TestRemoteProvider:
    def test_wire_format_and_retry_accounting(self, chat_server):
        provider = RemoteProvider(endpoint=chat_server, api_key="sk-test")
        gw = Gateway(provider, sleep=lambda s: None)
        gw.begin_transcript("remote")
        req = ChatRequest(
            messages=(ChatMessage("system", "s"), ChatMessage("user", "u")),
            temperature=1.0,
            seed=7,
            model="gpt-4-1106-preview",
        )
        exchange = gw.complete(req)
        assert exchange.attempt == 3  # two 429s then 200
        assert exchange.response_text == "echo:gpt-4-1106-preview"
        body = _ChatHandler.hits[-1]
        assert body["model"] == "gpt-4-1106-preview"
        assert body["temperature"] == 1.0
        assert body["seed"] == 7
        assert body["messages"] == [
            {"role": "system", "content": "s"},
            {"role": "user", "content": "u"},
        ]

    def test_from_env(self, chat_server, monkeypatch):
        monkeypatch.setenv("LLM_ENDPOINT", chat_server)
        monkeypatch.setenv("LLM_API_KEY", "sk-env")
        provider = RemoteProvider.from_env()
        assert provider.endpoint == chat_server
        assert provider.api_key == "sk-env"

    def test_from_env_requires_endpoint(self, monkeypatch):
        monkeypatch.delenv("LLM_ENDPOINT", raising=False)
        with pytest.raises(ValueError):
            RemoteProvider.from_env()
