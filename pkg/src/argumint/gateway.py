"""Provider-agnostic LLM client with strict-JSON enforcement.

Every call states the JSON schema its reply must satisfy.  Replies are
repaired (fence stripping, prose trimming), parsed, and validated; failures
are retried with the validation error appended to the prompt.  The gateway
never mutates prompts in any other way.  A mock provider backed by fixture
files keeps the whole pipeline runnable offline.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from collections.abc import Callable, Mapping
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import httpx
import jsonschema

logger = logging.getLogger(__name__)

JSON_MODE_TOOL = "native-schema-tool"
JSON_MODE_CONSTRAINED = "json-constrained"
JSON_MODE_REPAIR = "plain-with-repair"

PROMPT_IDS = ("structure", "validity", "plan", "socratic")


class GatewayError(RuntimeError):
    """Base class for gateway failures."""


class ProviderError(GatewayError):
    """The provider call failed (HTTP, auth, rate limit, missing fixture)."""

    def __init__(self, message: str, *, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable


class ProviderConfigError(ProviderError):
    """The provider cannot be used at all (missing key, unknown name)."""

    def __init__(self, message: str):
        super().__init__(message, retryable=False)


class GatewayTimeoutError(ProviderError):
    """The provider did not answer within the configured timeout."""


class SchemaFailureError(GatewayError):
    """All attempts produced output that failed schema validation."""

    def __init__(self, message: str, *, attempts: int, last_raw: str):
        super().__init__(message)
        self.attempts = attempts
        self.last_raw = last_raw


class UnparseableJsonError(ValueError):
    """No balanced JSON document could be extracted from the text."""


@dataclass(frozen=True)
class ModelConfig:
    """Per-call model settings; providers are selected by name so models swap
    via configuration, never via rebuild."""

    provider: str = "anthropic"
    model_name: str = "claude-sonnet-4-5"
    temperature: float = 0.0
    max_output_tokens: int = 4096
    timeout: float = 120.0
    json_mode: str = JSON_MODE_TOOL

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    def snapshot(self) -> dict:
        return asdict(self)


def config_fingerprint(cfg: ModelConfig, extra: Mapping | None = None) -> str:
    payload = {"model": cfg.snapshot(), "extra": dict(extra or {})}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class CompletionRecord:
    """One successful JSON completion: raw text, parsed value, and timing of
    the final attempt."""

    prompt_id: str
    raw_text: str
    parsed: Any
    latency: float
    attempts: int
    token_usage: dict[str, int] | None = None

    def __post_init__(self):
        if self.attempts < 1:
            raise ValueError("attempts must be >= 1")
        if self.latency <= 0:
            raise ValueError("latency must be positive")


@dataclass(frozen=True)
class ProviderReply:
    text: str
    token_usage: dict[str, int] | None = None
    # Mock fixtures declare their latency so offline runs are byte-stable;
    # HTTP providers leave this unset and get wall-clock timing.
    declared_latency: float | None = None


def repair_json(raw: str) -> Any:
    """Extract and parse the first balanced top-level JSON object or array.

    Code fences are stripped first, then leading/trailing prose is skipped by
    scanning for the first position where a balanced document parses.
    """
    text = _strip_fences(raw)
    decoder = json.JSONDecoder()
    idx = 0
    while True:
        candidates = [p for p in (text.find("{", idx), text.find("[", idx)) if p >= 0]
        if not candidates:
            raise UnparseableJsonError(f"no JSON document found in {raw[:80]!r}")
        pos = min(candidates)
        try:
            value, _ = decoder.raw_decode(text, pos)
            return value
        except json.JSONDecodeError:
            idx = pos + 1


def _strip_fences(text: str) -> str:
    if "```" not in text:
        return text
    out: list[str] = []
    for line in text.splitlines():
        if line.lstrip().startswith("```"):
            continue
        out.append(line)
    return "\n".join(out)


class TokenBucket:
    """Blocking token-bucket rate limiter shared across gateway calls."""

    def __init__(self, rate_per_second: float, capacity: float | None = None):
        if rate_per_second <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate_per_second
        self.capacity = capacity if capacity is not None else max(1.0, rate_per_second)
        self._tokens = self.capacity
        self._updated = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._updated) * self.rate)
                self._updated = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            time.sleep(wait)


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------


class MockProvider:
    """Serves canned completions from a fixtures directory or mapping.

    Fixtures are JSON files named ``<fixture_key>.json``.  A file whose top
    level is an object with a ``raw_text`` key is an envelope: ``raw_text``
    is emitted verbatim (useful for fenced/prose payloads) and ``latency_s``
    overrides the declared latency.  Any other content is the reply itself.
    """

    DEFAULT_LATENCY = 0.001

    def __init__(self, fixtures: str | Path | Mapping[str, Any]):
        if isinstance(fixtures, Mapping):
            self._dir = None
            self._table: dict[str, Any] = dict(fixtures)
        else:
            self._dir = Path(fixtures)
            self._table = {}
            if not self._dir.is_dir():
                raise ProviderConfigError(f"mock fixtures directory not found: {self._dir}")

    def _lookup(self, key: str) -> Any:
        if self._dir is None:
            if key not in self._table:
                raise ProviderError(
                    f"no mock fixture for key {key!r} (known: {sorted(self._table)[:8]})",
                    retryable=False,
                )
            return self._table[key]
        path = self._dir / f"{key}.json"
        if not path.is_file():
            raise ProviderError(
                f"no mock fixture file {path.name!r} in {self._dir}", retryable=False
            )
        return json.loads(path.read_text(encoding="utf-8"))

    def complete(
        self,
        prompt: str,
        cfg: ModelConfig,
        schema: Mapping | None = None,
        fixture_key: str | None = None,
    ) -> ProviderReply:
        key = fixture_key or f"prompt-{hashlib.sha256(prompt.encode('utf-8')).hexdigest()[:12]}"
        content = self._lookup(key)
        latency = self.DEFAULT_LATENCY
        if isinstance(content, Mapping) and "raw_text" in content:
            latency = float(content.get("latency_s", latency))
            text = str(content["raw_text"])
        else:
            text = json.dumps(content, ensure_ascii=False)
        return ProviderReply(text=text, token_usage=None, declared_latency=latency)


class AnthropicProvider:
    """Messages-API provider; supports forced tool use for native JSON output."""

    def __init__(self, *, api_key: str | None = None, base_url: str | None = None):
        self.api_key = api_key or os.environ.get("ANTHROPIC_API_KEY")
        if not self.api_key:
            raise ProviderConfigError(
                "anthropic provider needs ANTHROPIC_API_KEY (or pass --mock for offline runs)"
            )
        self.base_url = (base_url or os.environ.get("ANTHROPIC_BASE_URL") or "https://api.anthropic.com").rstrip("/")

    def complete(
        self,
        prompt: str,
        cfg: ModelConfig,
        schema: Mapping | None = None,
        fixture_key: str | None = None,
    ) -> ProviderReply:
        body: dict[str, Any] = {
            "model": cfg.model_name,
            "max_tokens": cfg.max_output_tokens,
            "temperature": cfg.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        if cfg.json_mode == JSON_MODE_TOOL and schema is not None:
            body["tools"] = [
                {
                    "name": "json_response",
                    "description": "Report the answer as a JSON document with the required shape.",
                    "input_schema": dict(schema),
                }
            ]
            body["tool_choice"] = {"type": "tool", "name": "json_response"}
        data = _post_json(
            f"{self.base_url}/v1/messages",
            body,
            headers={
                "x-api-key": self.api_key,
                "anthropic-version": "2023-06-01",
                "content-type": "application/json",
            },
            timeout=cfg.timeout,
        )
        text = ""
        for block in data.get("content", []):
            if block.get("type") == "tool_use":
                text = json.dumps(block.get("input", {}), ensure_ascii=False)
                break
            if block.get("type") == "text":
                text = block.get("text", "")
        usage = data.get("usage") or None
        return ProviderReply(text=text, token_usage=usage)


class OpenAIProvider:
    """Chat-completions provider; uses response_format for JSON constraints."""

    def __init__(self, *, api_key: str | None = None, base_url: str | None = None):
        self.api_key = api_key or os.environ.get("OPENAI_API_KEY")
        if not self.api_key:
            raise ProviderConfigError(
                "openai provider needs OPENAI_API_KEY (or pass --mock for offline runs)"
            )
        self.base_url = (base_url or os.environ.get("OPENAI_BASE_URL") or "https://api.openai.com").rstrip("/")

    def complete(
        self,
        prompt: str,
        cfg: ModelConfig,
        schema: Mapping | None = None,
        fixture_key: str | None = None,
    ) -> ProviderReply:
        body: dict[str, Any] = {
            "model": cfg.model_name,
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_output_tokens,
            "messages": [{"role": "user", "content": prompt}],
        }
        if cfg.json_mode == JSON_MODE_TOOL and schema is not None:
            body["response_format"] = {
                "type": "json_schema",
                "json_schema": {"name": "reply", "schema": dict(schema)},
            }
        elif cfg.json_mode == JSON_MODE_CONSTRAINED:
            body["response_format"] = {"type": "json_object"}
        data = _post_json(
            f"{self.base_url}/v1/chat/completions",
            body,
            headers={
                "Authorization": f"Bearer {self.api_key}",
                "content-type": "application/json",
            },
            timeout=cfg.timeout,
        )
        try:
            text = data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion response: {exc}") from exc
        usage = data.get("usage") or None
        return ProviderReply(text=text, token_usage=usage)


def _post_json(url: str, body: dict, *, headers: dict, timeout: float) -> dict:
    try:
        response = httpx.post(url, json=body, headers=headers, timeout=timeout)
    except httpx.TimeoutException as exc:
        raise GatewayTimeoutError(f"provider timed out after {timeout}s: {exc}") from exc
    except httpx.HTTPError as exc:
        raise ProviderError(f"provider request failed: {exc}") from exc
    if response.status_code >= 400:
        retryable = response.status_code in (408, 429, 500, 502, 503, 529)
        raise ProviderError(
            f"provider returned HTTP {response.status_code}: {response.text[:200]}",
            retryable=retryable,
        )
    return response.json()


def build_provider(cfg: ModelConfig, *, mock_fixtures: str | Path | Mapping | None = None):
    """Instantiate the provider named by ``cfg.provider``; any ``mock_fixtures``
    argument forces the mock regardless of the configured name."""
    if mock_fixtures is not None or cfg.provider == "mock":
        if mock_fixtures is None:
            raise ProviderConfigError("mock provider requires a fixtures directory")
        return MockProvider(mock_fixtures)
    if cfg.provider == "anthropic":
        return AnthropicProvider()
    if cfg.provider == "openai":
        return OpenAIProvider()
    raise ProviderConfigError(f"unknown provider {cfg.provider!r}")


# ---------------------------------------------------------------------------
# Gateway
# ---------------------------------------------------------------------------

RETRY_FEEDBACK = (
    "\n\nYour previous reply could not be used: {error}\n"
    "Reply again with only a JSON document that matches the required format."
)


@dataclass
class LlmGateway:
    """Shareable client wrapping one provider with retries, rate limiting and
    optional JSONL audit logging."""

    provider: Any
    retry_limit: int = 3
    backoff_base: float = 1.0
    rate_limiter: TokenBucket | None = None
    audit_path: Path | None = None
    # Called with every successful CompletionRecord; the eval harness uses
    # this to collect per-item latencies.
    observer: Callable[[CompletionRecord], None] | None = None
    _audit_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _sleep: Callable[[float], None] = field(default=time.sleep, repr=False)

    def complete_json(
        self,
        prompt: str,
        schema: Mapping,
        cfg: ModelConfig,
        *,
        prompt_id: str,
        fixture_key: str | None = None,
        check: Callable[[Any], Any] | None = None,
    ) -> CompletionRecord:
        """Run one JSON completion, retrying schema failures with feedback.

        ``check`` may perform semantic validation on the parsed value; any
        ValueError it raises is treated like a schema failure and fed back.
        Provider errors back off exponentially; non-retryable ones raise
        immediately.
        """
        if not prompt:
            raise ValueError("prompt must be non-empty")
        current = prompt
        raw = ""
        last_error: Exception | None = None
        for attempt in range(1, self.retry_limit + 1):
            if self.rate_limiter is not None:
                self.rate_limiter.acquire()
            started = time.perf_counter()
            try:
                reply = self.provider.complete(current, cfg, schema, fixture_key)
            except ProviderError as exc:
                self._audit(prompt_id, cfg, attempt, ok=False, error=str(exc), fixture_key=fixture_key)
                if not exc.retryable or attempt == self.retry_limit:
                    raise
                self._sleep(self.backoff_base * 2 ** (attempt - 1))
                last_error = exc
                continue
            latency = reply.declared_latency
            if latency is None:
                latency = time.perf_counter() - started
            raw = reply.text
            try:
                parsed = repair_json(raw)
                jsonschema.validate(parsed, dict(schema))
                if check is not None:
                    check(parsed)
            except (UnparseableJsonError, jsonschema.ValidationError, ValueError) as exc:
                message = str(exc).splitlines()[0][:300]
                self._audit(prompt_id, cfg, attempt, ok=False, error=message, fixture_key=fixture_key)
                last_error = exc
                current = prompt + RETRY_FEEDBACK.format(error=message)
                continue
            record = CompletionRecord(
                prompt_id=prompt_id,
                raw_text=raw,
                parsed=parsed,
                latency=max(latency, 1e-9),
                attempts=attempt,
                token_usage=reply.token_usage,
            )
            self._audit(prompt_id, cfg, attempt, ok=True, latency=record.latency, fixture_key=fixture_key)
            if self.observer is not None:
                self.observer(record)
            return record
        raise SchemaFailureError(
            f"{prompt_id} completion failed schema validation after {self.retry_limit} attempts: {last_error}",
            attempts=self.retry_limit,
            last_raw=raw,
        )

    def preflight(self) -> None:
        """Cheap sanity check that the provider is usable (no network call)."""
        if self.provider is None:
            raise ProviderConfigError("no provider configured")

    def _audit(self, prompt_id: str, cfg: ModelConfig, attempt: int, *, ok: bool, latency: float | None = None, error: str | None = None, fixture_key: str | None = None) -> None:
        if self.audit_path is None:
            return
        entry = {
            "ts": time.time(),
            "prompt_id": prompt_id,
            "provider": cfg.provider,
            "model": cfg.model_name,
            "attempt": attempt,
            "ok": ok,
            "latency": latency,
            "error": error,
            "fixture_key": fixture_key,
        }
        line = json.dumps(entry, ensure_ascii=False)
        with self._audit_lock:
            with open(self.audit_path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")


def with_temperature(cfg: ModelConfig, temperature: float) -> ModelConfig:
    return replace(cfg, temperature=temperature)
