"""Application configuration: environment variables first, flags override.

Recognized variables (all optional):

    ARGUMINT_PROVIDER         anthropic | openai | mock
    ARGUMINT_MODEL            provider model name
    ARGUMINT_JSON_MODE        native-schema-tool | json-constrained | plain-with-repair
    ARGUMINT_TIMEOUT          per-call timeout in seconds
    ARGUMINT_ANCHOR_THRESHOLD fuzzy-anchor acceptance threshold
    ARGUMINT_CONCURRENCY      evaluation fan-out cap
    ARGUMINT_MOCK_DIR         fixtures directory (forces the mock provider)
    ARGUMINT_STORE_DIR        server document-store directory
    ARGUMINT_ESSAY_LIMIT      max essay size in characters
    ARGUMINT_AUTH_TOKEN       shared secret required in X-Auth-Token
    ARGUMINT_AUDIT_LOG        JSONL audit file for gateway calls
    ARGUMINT_PORT             server port
    ARGUMINT_FRONTEND_DIR     directory with the built browser client to serve at /
    ARGUMINT_RATE_LIMIT       max provider requests per second (token bucket)

Provider API keys are read by the providers themselves (ANTHROPIC_API_KEY,
OPENAI_API_KEY, plus *_BASE_URL overrides).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .anchoring import DEFAULT_THRESHOLD
from .gateway import JSON_MODE_TOOL, ModelConfig
from .pipeline import PipelineConfig


@dataclass(frozen=True)
class AppConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    store_dir: Path = Path("./argumint-store")
    mock_dir: Path | None = None
    essay_limit: int = 100_000
    workers: int = 2
    auth_token: str | None = None
    audit_path: Path | None = None
    port: int = 8000
    frontend_dir: Path | None = None
    rate_limit: float | None = None

    @classmethod
    def from_env(cls, environ: dict | None = None) -> "AppConfig":
        env = os.environ if environ is None else environ
        model = ModelConfig(
            provider=env.get("ARGUMINT_PROVIDER", "anthropic"),
            model_name=env.get("ARGUMINT_MODEL", "claude-sonnet-4-5"),
            json_mode=env.get("ARGUMINT_JSON_MODE", JSON_MODE_TOOL),
            timeout=float(env.get("ARGUMINT_TIMEOUT", "120")),
        )
        pipeline = PipelineConfig(
            model=model,
            anchor_threshold=float(env.get("ARGUMINT_ANCHOR_THRESHOLD", str(DEFAULT_THRESHOLD))),
            concurrency=int(env.get("ARGUMINT_CONCURRENCY", "4")),
        )
        mock_dir = env.get("ARGUMINT_MOCK_DIR")
        audit = env.get("ARGUMINT_AUDIT_LOG")
        frontend = env.get("ARGUMINT_FRONTEND_DIR")
        rate = env.get("ARGUMINT_RATE_LIMIT")
        return cls(
            pipeline=pipeline,
            store_dir=Path(env.get("ARGUMINT_STORE_DIR", "./argumint-store")),
            mock_dir=Path(mock_dir) if mock_dir else None,
            essay_limit=int(env.get("ARGUMINT_ESSAY_LIMIT", "100000")),
            workers=int(env.get("ARGUMINT_WORKERS", "2")),
            auth_token=env.get("ARGUMINT_AUTH_TOKEN"),
            audit_path=Path(audit) if audit else None,
            port=int(env.get("ARGUMINT_PORT", "8000")),
            frontend_dir=Path(frontend) if frontend else None,
            rate_limit=float(rate) if rate else None,
        )

    def with_config_file(self, path: str | Path) -> "AppConfig":
        """Overlay settings from a JSON config file (env still wins for keys)."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        cfg = self
        model = cfg.pipeline.model
        for key in ("provider", "model_name", "json_mode"):
            if key in data:
                model = replace(model, **{key: data[key]})
        pipeline = replace(cfg.pipeline, model=model)
        if "anchor_threshold" in data:
            pipeline = replace(pipeline, anchor_threshold=float(data["anchor_threshold"]))
        if "concurrency" in data:
            pipeline = replace(pipeline, concurrency=int(data["concurrency"]))
        cfg = replace(cfg, pipeline=pipeline)
        for key in ("essay_limit", "workers", "port"):
            if key in data:
                cfg = replace(cfg, **{key: int(data[key])})
        if "store_dir" in data:
            cfg = replace(cfg, store_dir=Path(data["store_dir"]))
        if "mock_dir" in data:
            cfg = replace(cfg, mock_dir=Path(data["mock_dir"]))
        return cfg
