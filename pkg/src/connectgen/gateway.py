"""Chat-completion gateway: providers, retries, transcripts, and response parsing.

Two providers are available. ``RemoteProvider`` talks to any chat-completions
compatible HTTP endpoint (configured via ``LLM_ENDPOINT`` / ``LLM_API_KEY``).
``ScriptedProvider`` replays canned responses — FIFO by default, optionally
keyed by a hash of the request's last user message — and makes entire pipeline
runs deterministic and network-free.

Every request/response (including failed attempts) is appended to the active
:class:`PipelineTranscript`, which serializes to JSON Lines for provenance and
replay.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import requests

__all__ = [
    "GatewayError",
    "ProviderUnavailable",
    "ScriptExhausted",
    "MalformedResponse",
    "TransportError",
    "LabelMissing",
    "ChatMessage",
    "ChatRequest",
    "ChatExchange",
    "PipelineTranscript",
    "ScriptedProvider",
    "RemoteProvider",
    "Gateway",
    "request_key",
    "extract_labeled_block",
    "split_labeled_blocks",
    "save_transcript",
    "load_transcript",
]

log = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-4-1106-preview"
DEFAULT_TEMPERATURE = 1.0
EPOCH_ISO = "1970-01-01T00:00:00+00:00"


class GatewayError(Exception):
    pass


class ProviderUnavailable(GatewayError):
    """The provider could not produce a response (retries exhausted)."""


class ScriptExhausted(ProviderUnavailable):
    """The scripted provider ran out of canned responses."""


class MalformedResponse(GatewayError):
    """The provider answered with empty assistant text."""


class TransportError(GatewayError):
    """Retryable transport-level failure (connection error, 429, 5xx)."""


class LabelMissing(GatewayError):
    """A requested label was not found in the response text."""


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown role {self.role!r}")
        if not self.content:
            raise ValueError("message content must be non-empty")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    temperature: float = DEFAULT_TEMPERATURE
    seed: int | None = None
    model: str = DEFAULT_MODEL

    def __post_init__(self):
        msgs = tuple(self.messages)
        if not msgs:
            raise ValueError("request must carry at least one message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        object.__setattr__(self, "messages", msgs)

    def last_user_content(self) -> str | None:
        for msg in reversed(self.messages):
            if msg.role == "user":
                return msg.content
        return None


@dataclass(frozen=True)
class ChatExchange:
    request: ChatRequest
    response_text: str
    latency: float
    attempt: int
    error: str | None = None


@dataclass
class PipelineTranscript:
    id: str
    exchanges: list[ChatExchange] = field(default_factory=list)
    created_at: str = EPOCH_ISO

    def append(self, exchange: ChatExchange):
        self.exchanges.append(exchange)


def request_key(req: ChatRequest) -> str:
    """Hash of the request's last user message, for keyed scripted responses."""
    content = req.last_user_content() or ""
    return hashlib.sha256(content.encode("utf-8")).hexdigest()


class ScriptedProvider:
    """Deterministic stand-in for a chat API.

    Responses are consumed as a FIFO queue; when ``keyed`` responses are
    given, a request whose :func:`request_key` (or raw last user message)
    matches is answered from that table first, without consuming the queue.
    """

    def __init__(self, responses: Iterable[str] = (), keyed: dict[str, str] | None = None):
        self._queue: list[str] = list(responses)
        self._keyed = dict(keyed or {})
        self._lock = threading.Lock()

    def send(self, req: ChatRequest) -> str:
        with self._lock:
            if self._keyed:
                key = request_key(req)
                if key in self._keyed:
                    return self._keyed[key]
                raw = req.last_user_content()
                if raw in self._keyed:
                    return self._keyed[raw]
            if not self._queue:
                raise ScriptExhausted("scripted provider has no responses left")
            return self._queue.pop(0)

    @property
    def remaining(self) -> int:
        return len(self._queue)


class RemoteProvider:
    """Chat-completions JSON over HTTP(S)."""

    def __init__(
        self,
        endpoint: str,
        api_key: str = "",
        timeout: float = 60.0,
        max_in_flight: int = 2,
        session: requests.Session | None = None,
    ):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout
        self._session = session or requests.Session()
        self._slots = threading.Semaphore(max_in_flight)

    @classmethod
    def from_env(cls, **kwargs) -> "RemoteProvider":
        import os

        endpoint = os.environ.get("LLM_ENDPOINT", "")
        if not endpoint:
            raise ValueError("LLM_ENDPOINT is not set")
        return cls(endpoint=endpoint, api_key=os.environ.get("LLM_API_KEY", ""), **kwargs)

    def send(self, req: ChatRequest) -> str:
        payload: dict = {
            "model": req.model,
            "messages": [{"role": m.role, "content": m.content} for m in req.messages],
            "temperature": req.temperature,
        }
        if req.seed is not None:
            payload["seed"] = req.seed
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        with self._slots:
            try:
                resp = self._session.post(
                    self.endpoint, json=payload, headers=headers, timeout=self.timeout
                )
            except requests.RequestException as e:
                raise TransportError(f"transport failure: {e}") from e
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransportError(f"HTTP {resp.status_code} from provider")
        if resp.status_code != 200:
            raise GatewayError(f"HTTP {resp.status_code} from provider: {resp.text[:200]}")
        try:
            body = resp.json()
            return body["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise GatewayError(f"unparseable provider response: {e}") from e


class Gateway:
    """Provider wrapper with retry, backoff, and transcript recording.

    Retries transport failures with exponential backoff (1s/2s/4s, plus or
    minus 20% jitter) up to ``max_retries`` total attempts. Each attempt —
    failed or not — is appended to the active transcript. With a scripted
    provider the clock defaults to a deterministic counter so transcripts are
    byte-reproducible.
    """

    def __init__(
        self,
        provider,
        max_retries: int = 3,
        backoff_base: float = 1.0,
        jitter: float = 0.2,
        sleep: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
        clock: Callable[[], float] | None = None,
    ):
        self.provider = provider
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.jitter = jitter
        self._sleep = sleep
        self._rng = rng or random.Random()
        if clock is None:
            clock = _zero_clock if isinstance(provider, ScriptedProvider) else time.monotonic
        self._clock = clock
        self.transcript: PipelineTranscript | None = None

    def begin_transcript(self, transcript_id: str, created_at: str | None = None) -> PipelineTranscript:
        if created_at is None:
            if isinstance(self.provider, ScriptedProvider):
                created_at = EPOCH_ISO
            else:
                from datetime import datetime, timezone

                created_at = datetime.now(timezone.utc).isoformat()
        self.transcript = PipelineTranscript(id=transcript_id, created_at=created_at)
        return self.transcript

    def _record(self, exchange: ChatExchange):
        if self.transcript is not None:
            self.transcript.append(exchange)

    def complete(self, req: ChatRequest) -> ChatExchange:
        for attempt in range(1, self.max_retries + 1):
            start = self._clock()
            try:
                text = self.provider.send(req)
            except TransportError as e:
                self._record(
                    ChatExchange(req, "", latency=self._clock() - start, attempt=attempt, error=str(e))
                )
                if attempt == self.max_retries:
                    raise ProviderUnavailable(
                        f"provider failed after {attempt} attempts: {e}"
                    ) from e
                delay = self.backoff_base * (2 ** (attempt - 1))
                delay *= 1.0 + self._rng.uniform(-self.jitter, self.jitter)
                self._sleep(delay)
                continue
            except ScriptExhausted:
                raise
            latency = self._clock() - start
            if not text.strip():
                self._record(
                    ChatExchange(req, text, latency=latency, attempt=attempt, error="empty response")
                )
                raise MalformedResponse("provider returned empty assistant text")
            exchange = ChatExchange(req, text, latency=latency, attempt=attempt)
            self._record(exchange)
            return exchange
        raise ProviderUnavailable("unreachable")  # pragma: no cover


def _zero_clock() -> float:
    return 0.0


# ---------------------------------------------------------------------------
# Response parsing

_LABEL_LINE = re.compile(r"^\s*([A-Z][A-Z0-9 _-]*?)\s*:\s*(.*)$")


def split_labeled_blocks(text: str) -> list[tuple[str, str]]:
    """Split ``LABEL: content`` sections out of a completion.

    A block starts at a line whose prefix looks like an uppercase label
    followed by a colon, and runs until the next label line or end of text.
    """
    blocks: list[tuple[str, str]] = []
    current_label: str | None = None
    current_lines: list[str] = []

    def flush():
        if current_label is not None:
            blocks.append((current_label, "\n".join(current_lines).strip()))

    for line in text.splitlines():
        m = _LABEL_LINE.match(line)
        if m:
            flush()
            current_label = m.group(1).strip()
            current_lines = [m.group(2)]
        elif current_label is not None:
            current_lines.append(line)
    flush()
    return blocks


def extract_labeled_block(response_text: str, label: str) -> str:
    """Content of the first ``label:`` section; warns when the label repeats."""
    wanted = label.strip().upper()
    matches = [content for found, content in split_labeled_blocks(response_text) if found == wanted]
    if not matches:
        raise LabelMissing(f"label {label!r} not found in response")
    if len(matches) > 1:
        log.warning("label %r appears %d times; using the first", label, len(matches))
    return matches[0]


# ---------------------------------------------------------------------------
# Transcript persistence (JSON Lines, one exchange per line)


def _exchange_to_dict(e: ChatExchange) -> dict:
    return {
        "request": {
            "model": e.request.model,
            "temperature": e.request.temperature,
            "seed": e.request.seed,
            "messages": [{"role": m.role, "content": m.content} for m in e.request.messages],
        },
        "response_text": e.response_text,
        "latency": e.latency,
        "attempt": e.attempt,
        "error": e.error,
    }


def _exchange_from_dict(obj: dict) -> ChatExchange:
    req = obj["request"]
    return ChatExchange(
        request=ChatRequest(
            messages=tuple(ChatMessage(m["role"], m["content"]) for m in req["messages"]),
            temperature=req["temperature"],
            seed=req.get("seed"),
            model=req["model"],
        ),
        response_text=obj["response_text"],
        latency=obj["latency"],
        attempt=obj["attempt"],
        error=obj.get("error"),
    )


def save_transcript(transcript: PipelineTranscript, path: str | Path):
    lines = [json.dumps({"id": transcript.id, "created_at": transcript.created_at})]
    lines.extend(json.dumps(_exchange_to_dict(e), ensure_ascii=False) for e in transcript.exchanges)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_transcript(path: str | Path) -> PipelineTranscript:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"empty transcript file: {path}")
    header = json.loads(lines[0])
    transcript = PipelineTranscript(id=header["id"], created_at=header["created_at"])
    for line in lines[1:]:
        if line.strip():
            transcript.append(_exchange_from_dict(json.loads(line)))
    return transcript
