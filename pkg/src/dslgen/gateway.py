"""Chat-completion client with a deterministic replay backend for tests.

The live backend speaks the OpenAI-compatible wire format
(POST {base_url}/chat/completions) so local runners and public APIs share
one code path.  Errors are classified RETRYABLE (transport, timeout, 429,
5xx) or FATAL (auth, other 4xx, missing replay script) so the pipeline can
decide whether a failure consumes an attempt or aborts the run.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import httpx

ENV_BASE_URL = "LLM_BASE_URL"
ENV_API_KEY = "LLM_API_KEY"

_DSL_LINE_MARKERS = re.compile(
    r"\b(?:main|concept|enum|extends|isId|subset)\b|-->|<>-->|[{};]")

_FENCE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


class BackendKind(Enum):
    OPENAI_COMPATIBLE = "openai_compatible"
    REPLAY = "replay"


class GatewayError(Exception):
    """Backend failure; ``retryable`` controls pipeline handling."""

    def __init__(self, message: str, retryable: bool):
        super().__init__(message)
        self.retryable = retryable


@dataclass(frozen=True)
class BackendConfig:
    kind: BackendKind
    base_url: str = ""
    api_key: str | None = None
    timeout_s: int = 120
    fixture_path: str | None = None

    def __post_init__(self) -> None:
        if self.kind is BackendKind.REPLAY:
            if not self.fixture_path:
                raise ValueError("REPLAY backend requires fixture_path")
        elif not self.base_url:
            raise ValueError("HTTP backend requires base_url")

    @classmethod
    def from_env(cls, timeout_s: int = 120) -> "BackendConfig":
        base_url = os.environ.get(ENV_BASE_URL, "")
        return cls(kind=BackendKind.OPENAI_COMPATIBLE, base_url=base_url,
                   api_key=os.environ.get(ENV_API_KEY), timeout_s=timeout_s)


@dataclass(frozen=True)
class ChatRequest:
    model_id: str
    messages: tuple[tuple[str, str], ...]
    temperature: float
    max_tokens: int | None = 2048
    seed: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if not self.messages:
            raise ValueError("messages must be non-empty")

    def wire_body(self) -> dict:
        body = {
            "model": self.model_id,
            "messages": [{"role": r, "content": c} for r, c in self.messages],
            "temperature": self.temperature,
            "stream": False,
        }
        if self.max_tokens is not None:
            body["max_tokens"] = self.max_tokens
        if self.seed is not None:
            body["seed"] = self.seed
        return body


@dataclass
class ChatResponse:
    content: str
    finish_reason: str = "stop"
    latency_ms: int = 0
    raw: dict = field(default_factory=dict)


class _ReplayState:
    """Per-fixture cursors, serialized per (fixture, model) for determinism."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._cursors: dict[tuple[str, str], int] = {}
        self._fixtures: dict[str, dict[str, list[str]]] = {}

    def next_response(self, fixture_path: str, model_id: str) -> str:
        with self._lock:
            if fixture_path not in self._fixtures:
                self._fixtures[fixture_path] = json.loads(
                    Path(fixture_path).read_text(encoding="utf-8"))
            scripted = self._fixtures[fixture_path].get(model_id)
            if scripted is None:
                raise GatewayError(
                    f"replay fixture has no script for model {model_id!r}",
                    retryable=False)
            key = (fixture_path, model_id)
            cursor = self._cursors.get(key, 0)
            if cursor >= len(scripted):
                raise GatewayError(
                    f"replay script for {model_id!r} exhausted after "
                    f"{cursor} calls", retryable=False)
            self._cursors[key] = cursor + 1
            return scripted[cursor]

    def reset(self) -> None:
        with self._lock:
            self._cursors.clear()
            self._fixtures.clear()


_replay = _ReplayState()


def reset_replay() -> None:
    """Forget replay cursors and cached fixtures (test isolation)."""
    _replay.reset()


def _classify_status(status: int) -> bool:
    if status in (401, 403):
        return False
    if status == 429 or status >= 500:
        return True
    return False


def complete(cfg: BackendConfig, req: ChatRequest) -> ChatResponse:
    """Run one chat completion against the configured backend."""
    if cfg.kind is BackendKind.REPLAY:
        content = _replay.next_response(cfg.fixture_path, req.model_id)
        return ChatResponse(content=content, raw={"replay": True})

    url = cfg.base_url.rstrip("/") + "/chat/completions"
    headers = {"Content-Type": "application/json"}
    if cfg.api_key:
        headers["Authorization"] = f"Bearer {cfg.api_key}"
    started = time.monotonic()
    try:
        response = httpx.post(url, json=req.wire_body(), headers=headers,
                              timeout=cfg.timeout_s)
    except httpx.TimeoutException as exc:
        raise GatewayError(f"timeout after {cfg.timeout_s}s: {exc}",
                           retryable=True) from exc
    except httpx.HTTPError as exc:
        raise GatewayError(f"transport failure: {exc}", retryable=True) from exc
    latency_ms = int((time.monotonic() - started) * 1000)

    if response.status_code < 200 or response.status_code >= 300:
        raise GatewayError(
            f"HTTP {response.status_code}: {response.text[:200]}",
            retryable=_classify_status(response.status_code))
    try:
        payload = response.json()
        choice = payload["choices"][0]
        content = choice["message"]["content"]
        finish = choice.get("finish_reason", "stop")
    except (ValueError, LookupError, TypeError) as exc:
        raise GatewayError(f"malformed response body: {exc}",
                           retryable=True) from exc
    return ChatResponse(content=content, finish_reason=finish or "stop",
                        latency_ms=latency_ms, raw=payload)


def _is_dsl_line(line: str) -> bool:
    return bool(_DSL_LINE_MARKERS.search(line))


def extract_dsl(raw: str) -> str:
    """Pull the DSL out of a raw completion.

    First fenced code block wins (language tag ignored); otherwise leading
    and trailing prose lines (no DSL keyword or punctuation) are trimmed.
    Total and idempotent.
    """
    match = _FENCE.search(raw)
    text = match.group(1) if match else raw
    lines = text.split("\n")
    start = 0
    end = len(lines)
    while start < end and not _is_dsl_line(lines[start]):
        start += 1
    while end > start and not _is_dsl_line(lines[end - 1]):
        end -= 1
    if start >= end:
        return text.strip()
    return "\n".join(lines[start:end]).strip("\n")
