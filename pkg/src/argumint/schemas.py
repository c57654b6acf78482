"""JSON Schema documents for every payload the service stores or serves.

The copies under ``schemas/`` in the repository are generated from this
module (scripts/publish_schemas.py) and a test keeps them in sync, so the
files can be handed to API consumers as the contract.
"""

from __future__ import annotations

import json
from pathlib import Path

from .prompts import PLAN_SCHEMA, SOCRATIC_SCHEMA, STRUCTURE_SCHEMA, VALIDITY_SCHEMA

ANCHORED_SPAN_SCHEMA: dict = {
    "type": "object",
    "required": ["quote_id", "start", "end", "match_kind", "similarity"],
    "properties": {
        "quote_id": {"type": "integer", "minimum": 0},
        "start": {"type": "integer", "minimum": 0},
        "end": {"type": "integer", "minimum": 1},
        "match_kind": {"enum": ["exact", "fuzzy"]},
        "similarity": {"type": "number", "minimum": 0, "maximum": 1},
    },
}

PLAN_STEP_SCHEMA: dict = {
    "type": "object",
    "required": ["step_number", "description", "target_text", "issue", "relation_index", "anchor"],
    "properties": {
        "step_number": {"type": "integer", "minimum": 1},
        "description": {"type": "string"},
        "target_text": {"type": "string"},
        "issue": {"type": "string"},
        "relation_index": {"type": "integer", "minimum": 0},
        "anchor": ANCHORED_SPAN_SCHEMA,
    },
}

PLAN_DOC_SCHEMA: dict = {
    "type": "object",
    "required": ["steps"],
    "properties": {"steps": {"type": "array", "items": PLAN_STEP_SCHEMA}},
}

EVALUATED_ANALYSIS_SCHEMA: dict = {
    "type": "object",
    "required": ["analysis", "evaluations", "failed"],
    "properties": {
        "analysis": STRUCTURE_SCHEMA,
        "evaluations": {"type": "object", "additionalProperties": VALIDITY_SCHEMA},
        "failed": {"type": "array", "items": {"type": "integer", "minimum": 0}},
    },
}

PIPELINE_RESULT_SCHEMA: dict = {
    "type": "object",
    "required": ["essay", "analysis", "anchors", "evaluated", "plan", "warnings", "empty_argument"],
    "properties": {
        "essay": {"type": "string"},
        "analysis": STRUCTURE_SCHEMA,
        "anchors": {"type": "object", "additionalProperties": ANCHORED_SPAN_SCHEMA},
        "evaluated": EVALUATED_ANALYSIS_SCHEMA,
        "plan": PLAN_DOC_SCHEMA,
        "warnings": {"type": "array", "items": {"type": "string"}},
        "timings": {"type": "object", "additionalProperties": {"type": "number"}},
        "empty_argument": {"type": "boolean"},
    },
}

TURN_SCHEMA: dict = {
    "type": "object",
    "required": ["role", "text"],
    "properties": {
        "role": {"enum": ["user", "assistant"]},
        "text": {"type": "string"},
        "span": {"anyOf": [{"type": "null"}, ANCHORED_SPAN_SCHEMA]},
        "suggestion": {"anyOf": [{"type": "null"}, {"type": "object"}]},
        "step_number": {"anyOf": [{"type": "null"}, {"type": "integer"}]},
    },
}

COMMENT_MARKER_SCHEMA: dict = {
    "type": "object",
    "required": ["anchored", "intention", "user_text", "step_number", "created_at"],
    "properties": {
        "anchored": ANCHORED_SPAN_SCHEMA,
        "intention": {"type": "string"},
        "user_text": {"type": "string"},
        "step_number": {"type": "integer", "minimum": 1},
        "created_at": {"type": "number"},
    },
}

SESSION_STATE_SCHEMA: dict = {
    "type": "object",
    "required": ["session_id", "essay_id", "analysis_id", "plan", "step_states", "transcript", "comments", "finished"],
    "properties": {
        "session_id": {"type": "string"},
        "essay_id": {"type": "string"},
        "analysis_id": {"type": "string"},
        "plan": PLAN_DOC_SCHEMA,
        "step_states": {
            "type": "object",
            "additionalProperties": {"enum": ["pending", "active", "resolved", "skipped"]},
        },
        "transcript": {"type": "array", "items": TURN_SCHEMA},
        "comments": {"type": "array", "items": COMMENT_MARKER_SCHEMA},
        "finished": {"type": "boolean"},
    },
}

METRICS_REPORT_SCHEMA: dict = {
    "type": "object",
    "required": ["run_id", "created_at", "kind", "config", "sample_size", "seed", "metrics", "latency_mean", "latency_stddev", "per_item", "failures", "notes"],
    "properties": {
        "run_id": {"type": "string"},
        "created_at": {"type": "number"},
        "kind": {"enum": ["structure", "validity"]},
        "config": {"type": "object"},
        "sample_size": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "metrics": {"type": "object", "additionalProperties": {"type": "number"}},
        "latency_mean": {"type": "number", "minimum": 0},
        "latency_stddev": {"type": "number", "minimum": 0},
        "per_item": {"type": "array", "items": {"type": "object"}},
        "failures": {"type": "integer", "minimum": 0},
        "failure_detail": {"type": "array", "items": {"type": "object"}},
        "excluded_neutral": {"type": "integer", "minimum": 0},
        "skipped_no_consensus": {"type": "integer", "minimum": 0},
        "notes": {"type": "object"},
    },
}

# filename -> schema; prompt-reply schemas included so consumers see the
# exact shapes the models are held to
PUBLISHED_SCHEMAS: dict[str, dict] = {
    "structure_reply": STRUCTURE_SCHEMA,
    "validity_reply": VALIDITY_SCHEMA,
    "plan_reply": PLAN_SCHEMA,
    "socratic_reply": SOCRATIC_SCHEMA,
    "anchored_span": ANCHORED_SPAN_SCHEMA,
    "pipeline_result": PIPELINE_RESULT_SCHEMA,
    "session_state": SESSION_STATE_SCHEMA,
    "metrics_report": METRICS_REPORT_SCHEMA,
}


def publish(directory: str | Path) -> None:
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    for name, schema in PUBLISHED_SCHEMAS.items():
        document = {"$schema": "https://json-schema.org/draft/2020-12/schema", **schema}
        (root / f"{name}.schema.json").write_text(
            json.dumps(document, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
