"""Chat-completion backend access with retries and a deterministic mock.

The HTTP backend speaks the standard chat-completion JSON shape against any
compatible endpoint; the request body always carries the five decoding
parameters explicitly. The mock backend derives a six-section pseudo-report
from a digest of the prompt so end-to-end runs are fully offline and
reproducible.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import requests

from .promptgen import SECTION_NAMES


class GatewayError(Exception):
    pass


class NetworkError(GatewayError):
    """Connection problems and 5xx responses; retryable."""


class RateLimitedError(GatewayError):
    """HTTP 429; retryable with backoff."""


class AuthError(GatewayError):
    """Missing or rejected credential; never retried."""


class BackendError(GatewayError):
    """Non-retryable backend failure (malformed response, other 4xx)."""


@dataclass(frozen=True)
class CompletionParams:
    """Decoding parameters sent with every request.

    Defaults favor consistent, report-style text: low temperature, full
    vocabulary, no repetition penalties, room for a thorough report.
    """

    model: str = "gpt-4"
    temperature: float = 0.4
    max_tokens: int = 1000
    top_p: float = 1
    frequency_penalty: float = 0
    presence_penalty: float = 0

    def __post_init__(self):
        if not (0 <= self.temperature <= 2):
            raise ValueError(f"temperature must be in [0, 2], got {self.temperature}")
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be >= 1, got {self.max_tokens}")

    def request_body(self, prompt: str) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "top_p": self.top_p,
            "frequency_penalty": self.frequency_penalty,
            "presence_penalty": self.presence_penalty,
        }


@dataclass
class CompletionResult:
    text: str
    finish_reason: str  # stop | length | error
    prompt_tokens: int = 0
    completion_tokens: int = 0
    retries: int = 0

    @property
    def truncated(self) -> bool:
        return self.finish_reason == "length"


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    base_delay: float = 0.5
    max_delay: float = 8.0

    def delays(self) -> list[float]:
        """Planned sleep before each retry; len == max_attempts - 1."""
        return [min(self.base_delay * (2**i), self.max_delay) for i in range(self.max_attempts - 1)]


class MinIntervalLimiter:
    """Shared rate limiter: at most one request start per min_interval seconds."""

    def __init__(self, min_interval: float = 0.0, clock=time.monotonic, sleep=time.sleep):
        self.min_interval = min_interval
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_slot = 0.0

    def acquire(self):
        if self.min_interval <= 0:
            return
        with self._lock:
            now = self._clock()
            wait = self._next_slot - now
            self._next_slot = max(now, self._next_slot) + self.min_interval
        if wait > 0:
            self._sleep(wait)


_MOCK_OPENERS = [
    "You have been making steady progress in your recent practice.",
    "Your recent work shows real commitment to improving.",
    "You have put genuine effort into your practice sessions.",
    "Your practice record tells an encouraging story.",
]

_MOCK_BODIES = [
    "Keep building on what already works for you, one step at a time.",
    "Small, regular practice sessions will keep this momentum going.",
    "Reviewing a few solved problems each week will reinforce these gains.",
    "Asking one good question per lesson is a great habit to grow.",
    "Trying a slightly harder problem now and then will stretch your skills.",
    "Writing down your reasoning step by step will make your strengths visible.",
]


class MockBackend:
    """Offline stand-in: a deterministic pseudo-report derived from the prompt.

    Digest-equal prompts yield identical reports; the digest is embedded in
    the text so different prompts always differ.
    """

    name = "mock"

    def send(self, prompt: str, params: CompletionParams) -> CompletionResult:
        digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
        rng = random.Random(int(digest[:16], 16))
        lines = [f"Personalized feedback (reference {digest[:12]})", ""]
        for section in SECTION_NAMES:
            lines.append(f"## {section}")
            lines.append(rng.choice(_MOCK_OPENERS))
            lines.append(rng.choice(_MOCK_BODIES))
            lines.append("")
        text = "\n".join(lines).rstrip() + "\n"
        return CompletionResult(
            text=text,
            finish_reason="stop",
            prompt_tokens=len(prompt.split()),
            completion_tokens=len(text.split()),
        )


class HttpBackend:
    """Minimal chat-completion HTTP client for any compatible server."""

    name = "http"

    def __init__(self, endpoint: str, api_key: str | None = None,
                 api_key_env: str = "TAGFEEDBACK_API_KEY", timeout: float = 60.0,
                 session=None):
        if not endpoint:
            raise ValueError("endpoint must be configured for the http backend")
        self.endpoint = endpoint
        self.api_key = api_key if api_key is not None else os.environ.get(api_key_env)
        if not self.api_key:
            raise AuthError(f"no API credential: pass api_key or set ${api_key_env}")
        self.timeout = timeout
        self._session = session or requests.Session()

    def send(self, prompt: str, params: CompletionParams) -> CompletionResult:
        # sort_keys keeps the serialized body byte-stable across runs
        body = json.dumps(params.request_body(prompt), ensure_ascii=False, sort_keys=True)
        try:
            resp = self._session.post(
                self.endpoint,
                data=body.encode("utf-8"),
                headers={
                    "Content-Type": "application/json",
                    "Authorization": f"Bearer {self.api_key}",
                },
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise NetworkError(str(exc)) from exc

        if resp.status_code in (401, 403):
            raise AuthError(f"credential rejected (HTTP {resp.status_code})")
        if resp.status_code == 429:
            raise RateLimitedError("rate limited (HTTP 429)")
        if resp.status_code >= 500:
            raise NetworkError(f"server error (HTTP {resp.status_code})")
        if resp.status_code >= 400:
            raise BackendError(f"request rejected (HTTP {resp.status_code}): {resp.text[:500]}")

        try:
            payload = resp.json()
            choice = payload["choices"][0]
            text = choice["message"]["content"]
            finish = choice.get("finish_reason", "stop")
            usage = payload.get("usage", {})
        except (ValueError, LookupError, TypeError) as exc:
            raise BackendError(f"malformed completion response: {exc}") from exc
        return CompletionResult(
            text=text,
            finish_reason=finish,
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
        )


def complete(prompt: str, params: CompletionParams | None = None, backend=None,
             retry: RetryPolicy | None = None, sleep=time.sleep) -> CompletionResult:
    """Send one prompt, retrying retryable failures with exponential backoff."""
    if not prompt:
        raise ValueError("prompt must be non-empty")
    params = params or CompletionParams()
    backend = backend or MockBackend()
    retry = retry or RetryPolicy()
    delays = retry.delays()

    for attempt in range(retry.max_attempts):
        try:
            result = backend.send(prompt, params)
        except (RateLimitedError, NetworkError):
            if attempt == retry.max_attempts - 1:
                raise
            sleep(delays[attempt])
            continue
        result.retries = attempt
        return result
    raise AssertionError("unreachable")


def complete_many(items, params: CompletionParams | None = None, backend=None,
                  max_concurrency: int = 4, retry: RetryPolicy | None = None,
                  limiter: MinIntervalLimiter | None = None,
                  sleep=time.sleep) -> tuple[dict, dict]:
    """Complete (request_id, prompt) pairs with bounded concurrency.

    Returns (results, errors), both keyed by request id, so callers can
    reassemble batch order regardless of completion order.
    """
    items = list(items)
    results: dict = {}
    errors: dict = {}
    if not items:
        return results, errors
    limiter = limiter or MinIntervalLimiter(0.0)

    def run(request_id, prompt):
        limiter.acquire()
        return request_id, complete(prompt, params=params, backend=backend, retry=retry, sleep=sleep)

    with ThreadPoolExecutor(max_workers=max(1, max_concurrency)) as pool:
        futures = [pool.submit(run, rid, prompt) for rid, prompt in items]
        for (rid, _), future in zip(items, futures):
            try:
                _, result = future.result()
                results[rid] = result
            except GatewayError as exc:
                errors[rid] = exc
    return results, errors
