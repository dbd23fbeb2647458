"""Chat-completion backends: live HTTP, deterministic transcript replay, and
programmable scripted responses, plus a recorder that captures any session as
a replayable transcript.

Replay matches the accumulated request history against the recording after
whitespace normalization, so cosmetic prompt edits do not invalidate
fixtures; strict mode compares bytes.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass

import requests

DEFAULT_TEMPERATURE = 0.0  # reproducibility first
DEFAULT_MAX_TOKENS = 4096
DEFAULT_TIMEOUT = 60.0
RETRY_BACKOFF = (1.0, 2.0)  # seconds before the 1st and 2nd retry

API_KEY_ENV = "LLM_API_KEY"


class ChatError(Exception):
    pass


class BackendTimeout(ChatError):
    pass


class ReplayDivergence(ChatError):
    def __init__(self, index: int, message: str):
        super().__init__(message)
        self.index = index


class ReplayExhausted(ChatError):
    pass


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "system" | "user" | "assistant"
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown role {self.role!r}")
        if self.role in ("user", "assistant") and not self.content:
            raise ValueError("user/assistant content must be non-empty")


@dataclass
class ChatParams:
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    timeout: float = DEFAULT_TIMEOUT


@dataclass
class Transcript:
    messages: list[ChatMessage]
    model: str = "unknown"
    task_id: str = ""
    created: str = ""

    def save(self, path):
        doc = {
            "model": self.model,
            "task_id": self.task_id,
            "created": self.created,
            "messages": [{"role": m.role, "content": m.content} for m in self.messages],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Transcript":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(
            messages=[ChatMessage(m["role"], m["content"]) for m in doc["messages"]],
            model=doc.get("model", "unknown"),
            task_id=doc.get("task_id", ""),
            created=doc.get("created", ""),
        )


def normalize(text: str) -> str:
    return " ".join(text.split())


def _validate_history(history: list[ChatMessage]):
    if not history:
        raise ValueError("history must be non-empty")
    non_system = [m for m in history if m.role != "system"]
    if not non_system or non_system[0].role != "user":
        raise ValueError("first non-system message must have role user")


class LiveBackend:
    """One chat-completions HTTP endpoint; retries transport errors twice
    with exponential backoff."""

    def __init__(self, base_url: str, model: str, api_key: str | None = None,
                 sleep=time.sleep, session=None):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self._sleep = sleep
        self._session = session or requests.Session()

    def chat(self, history: list[ChatMessage], params: ChatParams | None = None) -> ChatMessage:
        _validate_history(history)
        params = params or ChatParams()
        payload = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in history],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error = None
        for attempt in range(1 + len(RETRY_BACKOFF)):
            if attempt > 0:
                self._sleep(RETRY_BACKOFF[attempt - 1])
            try:
                resp = self._session.post(
                    f"{self.base_url}/chat/completions",
                    json=payload, headers=headers, timeout=params.timeout,
                )
                resp.raise_for_status()
                content = resp.json()["choices"][0]["message"]["content"]
                return ChatMessage(role="assistant", content=content)
            except requests.Timeout as err:
                last_error = BackendTimeout(f"no reply within {params.timeout} s: {err}")
            except (requests.ConnectionError, requests.HTTPError) as err:
                last_error = ChatError(f"transport error: {err}")
        raise last_error


class ScriptedBackend:
    """Returns programmed responses in order; the cursor spans sessions."""

    def __init__(self, responses: list[str]):
        self._responses = list(responses)
        self._cursor = 0
        self.requests: list[list[ChatMessage]] = []

    def chat(self, history: list[ChatMessage], params: ChatParams | None = None) -> ChatMessage:
        _validate_history(history)
        self.requests.append(list(history))
        if self._cursor >= len(self._responses):
            raise ChatError("scripted backend ran out of responses")
        content = self._responses[self._cursor]
        self._cursor += 1
        return ChatMessage(role="assistant", content=content)


class ReplayBackend:
    """Replays a recorded transcript; a pure function of
    (transcript, request history)."""

    def __init__(self, transcript: Transcript, strict: bool = False):
        self._recorded = transcript.messages
        self._strict = strict
        self._cursor = 0
        self._session_prefix: list[ChatMessage] = []

    def _same(self, a: ChatMessage, b: ChatMessage) -> bool:
        if a.role != b.role:
            return False
        if self._strict:
            return a.content == b.content
        return normalize(a.content) == normalize(b.content)

    def _new_messages(self, history: list[ChatMessage]) -> list[ChatMessage]:
        prefix = self._session_prefix
        if len(history) > len(prefix) and all(
            self._same(h, p) for h, p in zip(history, prefix)
        ):
            return history[len(prefix):]
        return list(history)  # fresh session

    def chat(self, history: list[ChatMessage], params: ChatParams | None = None) -> ChatMessage:
        _validate_history(history)
        for msg in self._new_messages(history):
            if self._cursor >= len(self._recorded):
                raise ReplayExhausted("request goes beyond the recorded transcript")
            if not self._same(self._recorded[self._cursor], msg):
                raise ReplayDivergence(
                    self._cursor,
                    f"request message {self._cursor} differs from the recording",
                )
            self._cursor += 1
        if self._cursor >= len(self._recorded):
            raise ReplayExhausted("recording has no response left for this request")
        response = self._recorded[self._cursor]
        if response.role != "assistant":
            raise ReplayDivergence(
                self._cursor,
                f"recording expects a request at index {self._cursor}, "
                "but the session asked for a response",
            )
        self._cursor += 1
        self._session_prefix = list(history) + [response]
        return response


class RecordingBackend:
    """Wraps another backend and accumulates the flat message stream, giving
    a lossless transcript: replaying it reproduces the downstream run."""

    def __init__(self, inner, model: str = "unknown", task_id: str = ""):
        self._inner = inner
        self.model = model
        self.task_id = task_id
        self.messages: list[ChatMessage] = []
        self._session_prefix: list[ChatMessage] = []

    def chat(self, history: list[ChatMessage], params: ChatParams | None = None) -> ChatMessage:
        prefix = self._session_prefix
        if len(history) > len(prefix) and history[:len(prefix)] == prefix:
            new = history[len(prefix):]
        else:
            new = list(history)
        response = self._inner.chat(history, params)
        self.messages.extend(new)
        self.messages.append(response)
        self._session_prefix = list(history) + [response]
        return response

    def to_transcript(self) -> Transcript:
        return Transcript(
            messages=list(self.messages),
            model=self.model,
            task_id=self.task_id,
            created=time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        )

    def save(self, path) -> Transcript:
        transcript = self.to_transcript()
        transcript.save(path)
        return transcript
