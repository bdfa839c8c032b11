"""Summary-generating backends behind one interface.

Two implementations: a chat-completion HTTP client with bounded retries,
exponential backoff, and an optional rate-limit token bucket, and a fully
deterministic offline mock whose output is a pure function of the prompt
text. The mock reads the prompt's own sections, so tests can observe
whether structural context actually reached the prompt.
"""

from __future__ import annotations

import logging
import re
import threading
import time
from dataclasses import dataclass
from typing import Optional

import requests

log = logging.getLogger(__name__)


class TransportError(Exception):
    """Raised when the remote backend stays unreachable after retries."""


class RateLimited(Exception):
    """Raised when the remote backend keeps rate-limiting past the retry cap."""

    def __init__(self, message: str, retry_after: float = 0.0):
        super().__init__(message)
        self.retry_after = retry_after


class MalformedResponse(Exception):
    """Raised when the remote backend returns an unparseable payload."""


@dataclass(frozen=True)
class LlmRequest:
    prompt_text: str
    attachment: Optional[str] = None
    model_id: str = "mock"
    max_output_tokens: int = 256
    temperature: float = 0.0


@dataclass(frozen=True)
class LlmResponse:
    summary: str
    model_id: str
    latency_ms: int
    token_usage: Optional[tuple[int, int]] = None  # (prompt, completion)


_SECTION_RE = re.compile(r"^\[([A-Z_]+)\]\n(.*?)(?=\n\n\[[A-Z_]+\]\n|\Z)",
                         re.MULTILINE | re.DOTALL)
_FN_NAME_RE = re.compile(r"\bfunction\s+([A-Za-z_$][A-Za-z0-9_$]*)")
_EDGE_RE = re.compile(r"^\s*\S+\s->\s(\S+)", re.MULTILINE)
_PARAM_RE = re.compile(r"^- parameter (\S+?):?\s", re.MULTILINE)


def parse_prompt_sections(prompt_text: str) -> dict[str, str]:
    return {m.group(1): m.group(2).strip() for m in _SECTION_RE.finditer(prompt_text)}


class MockBackend:
    """Deterministic offline backend. The summary names the target function,
    the callees listed in the call-graph section, and the parameters listed
    in the identifiers section, whichever of those the prompt contains."""

    model_id = "mock"

    def complete(self, req: LlmRequest) -> LlmResponse:
        sections = parse_prompt_sections(req.prompt_text)
        target = sections.get("TARGET", "")
        m = _FN_NAME_RE.search(target)
        if m:
            name = m.group(1)
        elif re.search(r"\bconstructor\b", target):
            name = "constructor"
        elif re.search(r"\breceive\b", target):
            name = "receive"
        else:
            name = "fallback"
        callees: list[str] = []
        for edge_target in _EDGE_RE.findall(sections.get("CALL_GRAPH", "")):
            if edge_target not in callees:
                callees.append(edge_target)
        params = list(_PARAM_RE.findall(sections.get("IDENTIFIERS", "")))
        clauses = []
        if callees:
            clauses.append("calls " + ", ".join(callees))
        if params:
            clauses.append("params " + ", ".join(params))
        summary = name + (": " + "; ".join(clauses) if clauses else "") + "."
        return LlmResponse(summary=summary, model_id=self.model_id, latency_ms=0)


class _TokenBucket:
    """Minimal rate limiter; acquire() blocks until a token is available."""

    def __init__(self, rate_per_sec: float):
        self.rate = rate_per_sec
        self.capacity = max(1.0, rate_per_sec)
        self.tokens = self.capacity
        self.updated = time.monotonic()
        self.lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self.lock:
                now = time.monotonic()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            time.sleep(wait)


class RemoteChatBackend:
    """Chat-completion client speaking
    POST {"model", "messages", "max_tokens", "temperature"}
      -> {"choices": [{"message": {"content": ...}}]}."""

    def __init__(self, endpoint: str, model_id: str,
                 api_key: Optional[str] = None, timeout: float = 60.0,
                 max_retries: int = 3, backoff: float = 0.25,
                 rate_per_sec: Optional[float] = None,
                 send_attachment: bool = False):
        self.endpoint = endpoint
        self.model_id = model_id
        self.api_key = api_key
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.bucket = _TokenBucket(rate_per_sec) if rate_per_sec else None
        self.send_attachment = send_attachment

    def complete(self, req: LlmRequest) -> LlmResponse:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": req.model_id or self.model_id,
            "messages": [{"role": "user", "content": req.prompt_text}],
            "max_tokens": req.max_output_tokens,
            "temperature": req.temperature,
        }
        if self.send_attachment and req.attachment:
            payload["attachment_path"] = req.attachment
        last_error: Optional[Exception] = None
        rate_limited = False
        retry_after = 0.0
        for attempt in range(self.max_retries + 1):
            if attempt:
                log.info("retrying completion request (attempt %d of %d)",
                         attempt + 1, self.max_retries + 1)
                time.sleep(retry_after if rate_limited else
                           self.backoff * (2 ** (attempt - 1)))
            rate_limited = False
            if self.bucket is not None:
                self.bucket.acquire()
            start = time.monotonic()
            try:
                resp = requests.post(self.endpoint, json=payload, headers=headers,
                                     timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = exc
                log.warning("completion request failed (attempt %d): %s", attempt + 1, exc)
                continue
            latency_ms = int((time.monotonic() - start) * 1000)
            if resp.status_code == 429:
                retry_after = float(resp.headers.get("Retry-After", self.backoff))
                last_error = RateLimited("rate limited", retry_after)
                rate_limited = True
                log.warning("rate limited (attempt %d), retry after %.2fs",
                            attempt + 1, retry_after)
                continue
            if resp.status_code >= 500:
                last_error = TransportError(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise TransportError(
                    f"completion endpoint returned {resp.status_code}: {resp.text[:200]}")
            try:
                body = resp.json()
                content = body["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise MalformedResponse(f"unexpected completion payload: {exc}") from exc
            if not isinstance(content, str):
                raise MalformedResponse("completion content is not a string")
            usage = None
            if isinstance(body.get("usage"), dict):
                u = body["usage"]
                if "prompt_tokens" in u and "completion_tokens" in u:
                    usage = (int(u["prompt_tokens"]), int(u["completion_tokens"]))
            return LlmResponse(summary=content.strip(), model_id=payload["model"],
                               latency_ms=latency_ms, token_usage=usage)
        if isinstance(last_error, RateLimited):
            raise last_error
        raise TransportError(f"completion failed after {self.max_retries + 1} "
                             f"attempts: {last_error}")


def summarize(backend, req: LlmRequest) -> LlmResponse:
    """Run one summary-generation request against the given backend."""
    if not req.prompt_text:
        raise ValueError("prompt_text must be nonempty")
    return backend.complete(req)
