"""Chat-completion backends: a remote HTTP JSON backend and a scripted mock.

Both implement the same `generate(messages, params)` surface, so everything
downstream (pipeline, eval harness) runs hermetically against the mock.
The wire contract is the common chat-completions JSON shape: POST
{model, messages, temperature, max_tokens, seed?} and read the first
choice's message content.
"""

from __future__ import annotations

import enum
import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Union

import requests


class Role(enum.Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self):
        if self.role in (Role.USER, Role.ASSISTANT) and not self.content:
            raise ValueError(f"{self.role.value} message content must be non-empty")

    def as_wire(self) -> Dict[str, str]:
        return {"role": self.role.value, "content": self.content}


def system(content: str) -> ChatMessage:
    return ChatMessage(Role.SYSTEM, content)


def user(content: str) -> ChatMessage:
    return ChatMessage(Role.USER, content)


def assistant(content: str) -> ChatMessage:
    return ChatMessage(Role.ASSISTANT, content)


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.7
    max_tokens: int = 1024
    seed: Optional[int] = None

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class BackendConfig:
    endpoint: str
    model: str
    credential_env: Optional[str] = None  # env var NAME; the value is never stored
    timeout: float = 60.0
    max_retries: int = 3


class TransportError(RuntimeError):
    """Network-level failure that persisted through all retries."""


class BackendError(RuntimeError):
    """Non-success response from the backend (status and body attached)."""

    def __init__(self, message: str, status: Optional[int] = None, body: str = ""):
        super().__init__(message)
        self.status = status
        self.body = body


class MalformedResponse(RuntimeError):
    """Response JSON lacked the expected completion field."""


def transcript_fingerprint(messages: Sequence[ChatMessage]) -> str:
    """Stable hash of a transcript, used for mock keying and request logs."""
    h = hashlib.sha256()
    for msg in messages:
        h.update(msg.role.value.encode())
        h.update(b"\x00")
        h.update(msg.content.encode())
        h.update(b"\x00")
    return h.hexdigest()


def _check_transcript(messages: Sequence[ChatMessage]) -> None:
    if not messages:
        raise ValueError("transcript must be non-empty")
    if messages[-1].role is not Role.USER:
        raise ValueError("last transcript message must have role user")


class ChatBackend:
    def generate(self, messages: Sequence[ChatMessage], params: GenerationParams) -> ChatMessage:
        raise NotImplementedError


class HttpBackend(ChatBackend):
    """Remote chat-completions backend with bounded retries.

    Retries (backoff 1s/2s/4s by default) only on transport failures and
    429/5xx statuses. The credential is read from the configured environment
    variable at call time and never logged or serialized.
    """

    RETRY_STATUSES = frozenset({429, 500, 502, 503, 504})

    def __init__(
        self,
        config: BackendConfig,
        session: Optional[requests.Session] = None,
        sleep: Callable[[float], None] = time.sleep,
        log_path: Optional[str] = None,
    ):
        self.config = config
        self._session = session or requests.Session()
        self._sleep = sleep
        self._log_path = log_path
        self._log_lock = threading.Lock()

    def _headers(self) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.credential_env:
            token = os.environ.get(self.config.credential_env)
            if not token:
                raise BackendError(
                    f"credential environment variable {self.config.credential_env} is not set"
                )
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def generate(self, messages: Sequence[ChatMessage], params: GenerationParams) -> ChatMessage:
        _check_transcript(messages)
        payload = {
            "model": self.config.model,
            "messages": [m.as_wire() for m in messages],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        if params.seed is not None:
            payload["seed"] = params.seed
        started = time.monotonic()
        attempts = max(1, self.config.max_retries)
        last_exc: Optional[Exception] = None
        response = None
        for attempt in range(attempts):
            if attempt:
                self._sleep(2 ** (attempt - 1))
            try:
                response = self._session.post(
                    self.config.endpoint,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.config.timeout,
                )
            except requests.RequestException as exc:
                last_exc = exc
                response = None
                continue
            if response.status_code in self.RETRY_STATUSES:
                last_exc = BackendError(
                    f"retryable status {response.status_code}",
                    status=response.status_code,
                    body=response.text,
                )
                continue
            break
        if response is None:
            raise TransportError(f"request failed after {attempts} attempts: {last_exc}")
        if response.status_code in self.RETRY_STATUSES:
            raise BackendError(
                f"backend returned {response.status_code} after {attempts} attempts",
                status=response.status_code,
                body=response.text,
            )
        if response.status_code != 200:
            raise BackendError(
                f"backend returned {response.status_code}",
                status=response.status_code,
                body=response.text,
            )
        try:
            data = response.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"missing completion field: {exc}") from exc
        if not isinstance(content, str):
            raise MalformedResponse("completion content is not a string")
        self._log(messages, content, time.monotonic() - started)
        return assistant(content)

    def _log(self, messages: Sequence[ChatMessage], content: str, latency: float) -> None:
        if not self._log_path:
            return
        record = {
            "fingerprint": transcript_fingerprint(messages),
            "prompt_chars": sum(len(m.content) for m in messages),
            "completion_chars": len(content),
            "latency_s": round(latency, 4),
        }
        with self._log_lock:
            with open(self._log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record) + "\n")


class ScriptExhausted(BackendError):
    """The mock's scripted responses ran out (or a fingerprint is unknown)."""


@dataclass
class RecordedCall:
    messages: List[ChatMessage]
    params: GenerationParams
    response: str


class MockBackend(ChatBackend):
    """Deterministic scripted backend.

    Sequence mode (list of responses) replays in order regardless of the
    prompt; fingerprint mode (dict) keys on the transcript fingerprint.
    Every call is recorded for later assertion. Internally synchronized;
    sequence mode serializes calls so replay order is preserved.
    """

    def __init__(self, script: Union[Sequence[str], Dict[str, str]]):
        self._lock = threading.Lock()
        self.calls: List[RecordedCall] = []
        if isinstance(script, dict):
            self._by_fingerprint: Optional[Dict[str, str]] = dict(script)
            self._queue: List[str] = []
        else:
            self._by_fingerprint = None
            self._queue = list(script)
        self._cursor = 0

    def generate(self, messages: Sequence[ChatMessage], params: GenerationParams) -> ChatMessage:
        _check_transcript(messages)
        with self._lock:
            if self._by_fingerprint is not None:
                key = transcript_fingerprint(messages)
                if key not in self._by_fingerprint:
                    raise ScriptExhausted(f"no scripted response for fingerprint {key}")
                content = self._by_fingerprint[key]
            else:
                if self._cursor >= len(self._queue):
                    raise ScriptExhausted(
                        f"mock script exhausted after {self._cursor} responses"
                    )
                content = self._queue[self._cursor]
                self._cursor += 1
            self.calls.append(RecordedCall(list(messages), params, content))
        return assistant(content)

    @property
    def remaining(self) -> int:
        if self._by_fingerprint is not None:
            return len(self._by_fingerprint)
        return len(self._queue) - self._cursor


def load_mock_script(path: str) -> MockBackend:
    """Load a mock script file: a JSON list (sequence mode) or object
    (fingerprint mode), optionally wrapped as {"mode": ..., "responses": ...}."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "responses" in data:
        data = data["responses"]
    if isinstance(data, list) and all(isinstance(x, str) for x in data):
        return MockBackend(data)
    if isinstance(data, dict) and all(isinstance(v, str) for v in data.values()):
        return MockBackend(data)
    raise ValueError(f"unrecognized mock script shape in {path}")
