"""Test doubles and canned-response builders shared across the suite."""

from __future__ import annotations

import json
import time
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from argumint.gateway import LlmGateway, ModelConfig, ProviderError, ProviderReply
from argumint.pipeline import PipelineConfig


class ScriptedProvider:
    """Deterministic in-memory provider.

    Responses come from a fixture-key table and/or a FIFO queue (queue wins
    when non-empty).  Each scripted item may be a dict/list (serialized to
    JSON), a raw string (emitted verbatim), or an Exception (raised).
    ``sleep_s`` introduces real latency; ``declared_latency`` controls the
    reply's declared latency (None means the gateway measures wall clock).
    """

    def __init__(
        self,
        table: Mapping[str, Any] | None = None,
        queue: list[Any] | None = None,
        *,
        sleep_s: float | Mapping[str, float] = 0.0,
        declared_latency: float | None = 0.001,
    ):
        self.table = dict(table or {})
        self.queue = list(queue or [])
        self.sleep_s = sleep_s
        self.declared_latency = declared_latency
        self.calls: list[tuple[str, str]] = []  # (fixture_key, prompt)

    def complete(self, prompt, cfg, schema=None, fixture_key=None):
        self.calls.append((fixture_key or "", prompt))
        if self.queue:
            item = self.queue.pop(0)
        elif fixture_key in self.table:
            item = self.table[fixture_key]
        else:
            raise ProviderError(f"no scripted response for key {fixture_key!r}", retryable=False)
        delay = (
            self.sleep_s.get(fixture_key or "", 0.0)
            if isinstance(self.sleep_s, Mapping)
            else self.sleep_s
        )
        if delay:
            time.sleep(delay)
        if isinstance(item, Exception):
            raise item
        if callable(item):
            item = item(prompt)
        text = item if isinstance(item, str) else json.dumps(item, ensure_ascii=False)
        return ProviderReply(text=text, declared_latency=self.declared_latency)


def scripted_gateway(*args, **kwargs) -> LlmGateway:
    """Gateway over a ScriptedProvider with no backoff sleeping."""
    provider = ScriptedProvider(*args, **kwargs)
    return LlmGateway(provider=provider, backoff_base=0.0, _sleep=lambda _: None)


def make_mock_model() -> ModelConfig:
    return ModelConfig(provider="mock", model_name="scripted")


def make_mock_config() -> PipelineConfig:
    return PipelineConfig(model=make_mock_model())


# ---------------------------------------------------------------------------
# Canned response builders (the JSON shapes each prompt demands)
# ---------------------------------------------------------------------------


def structure_response(
    content: str,
    claim_quote: str,
    quotes: Mapping[int, str] | None = None,
    relations: list | None = None,
) -> dict:
    return {
        "claim": {
            "content": content,
            "claim_quote": claim_quote,
            "support_relations": {
                "quotes": {str(k): v for k, v in (quotes or {}).items()},
                "relations": relations or [],
            },
        }
    }


def empty_structure_response() -> dict:
    return structure_response("", "", {}, [])


def validity_response(
    claim: str,
    evidence: list[str] | str,
    strength: str = "valid",
    *,
    label: str | None = None,
    label_long: str | None = None,
    rationale: str = "Assuming the evidence is true, the step is examined link by link.",
    rationale_short: str = "Short note for the writer.",
    requirements: str = "State the missing link explicitly.",
) -> dict:
    if label is None:
        label = "none" if strength == "valid" else "hasty generalization"
    if label_long is None:
        label_long = (
            "none"
            if strength == "valid"
            else "drawing a broad conclusion from an unrepresentative sample"
        )
    return {
        "claim": claim,
        "evidence": evidence,
        "evaluation": {
            "rationale": rationale,
            "strength": strength,
            "rationale_short": rationale_short,
            "requirements": requirements,
            "label": label,
            "label_long": label_long,
        },
    }


def plan_response(steps: list[tuple[str, str, str]]) -> dict:
    return {
        "steps": [
            {
                "stepNumber": i + 1,
                "description": description,
                "targetText": target,
                "issue": issue,
            }
            for i, (description, target, issue) in enumerate(steps)
        ]
    }


def socratic_response(
    message: str,
    sentence: str,
    *,
    resolved: bool = False,
    intention: str | None = None,
    suggestion: dict | None = None,
) -> dict:
    payload: dict[str, Any] = {
        "messageToUser": message,
        "sentenceToUser": sentence,
        "stepResolved": resolved,
    }
    if intention is not None:
        payload["intentionSummary"] = intention
    if suggestion is not None:
        payload["suggestion"] = suggestion
    return payload


def write_fixture(directory: Path, key: str, content: Any) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{key}.json").write_text(
        json.dumps(content, ensure_ascii=False, indent=2), encoding="utf-8"
    )


def pipeline_table(
    essay: str,
    structure: Mapping,
    validities: Mapping[int, Mapping] | None = None,
    plan: Mapping | None = None,
    socratic: list | None = None,
) -> dict[str, Any]:
    """Fixture-key table matching the pipeline's keying scheme for one essay."""
    from argumint.pipeline import essay_key

    key = essay_key(essay)
    table: dict[str, Any] = {f"structure-{key}": structure}
    for index, verdict in (validities or {}).items():
        table[f"validity-{key}-r{index}"] = verdict
    if plan is not None:
        table[f"plan-{key}"] = plan
    for turn_index, payload in enumerate(socratic or []):
        table[f"socratic-{key}-t{turn_index}"] = payload
    return table


def make_session_result(step_count: int, extra_valid: int = 1):
    """Hand-built PipelineResult with ``step_count`` invalid relations (one
    plan step each) plus ``extra_valid`` valid relations."""
    from argumint.anchoring import anchor_all
    from argumint.graph import (
        ArgumentAnalysis,
        EvaluatedAnalysis,
        Evaluation,
        SupportRelation,
    )
    from argumint.pipeline import Plan, PlanStep, PipelineResult

    claim = "City parks deserve a larger budget."
    total = step_count + extra_valid
    quote_texts = {i + 1: f"Reason number {i + 1} backs the budget case." for i in range(total)}
    essay = claim + " " + " ".join(quote_texts[i + 1] for i in range(total))
    analysis = ArgumentAnalysis(
        claim_content="bigger park budget",
        claim_quote=claim,
        quotes=quote_texts,
        relations=tuple(SupportRelation(sources=(i + 1,), target=0) for i in range(total)),
    )
    anchors, dropped = anchor_all(essay, analysis)
    assert dropped == []
    evaluations = {}
    for index in range(total):
        invalid = index < step_count
        evaluations[index] = Evaluation(
            claim=claim,
            evidence=(quote_texts[index + 1],),
            rationale="checked step by step",
            strength="invalid" if invalid else "valid",
            rationale_short="weak link" if invalid else "fine",
            requirements="tie the reason to the budget" if invalid else "nothing",
            label="non sequitur" if invalid else "none",
            label_long="conclusion does not follow" if invalid else "none",
        )
    steps = tuple(
        PlanStep(
            step_number=i + 1,
            description=f"Repair reason {i + 1}",
            target_text=quote_texts[i + 1],
            issue="the reason does not connect to the claim",
            relation_index=i,
            anchor=anchors[i + 1],
        )
        for i in range(step_count)
    )
    return PipelineResult(
        essay=essay,
        analysis=analysis,
        anchors=anchors,
        evaluated=EvaluatedAnalysis(analysis=analysis, evaluations=evaluations),
        plan=Plan(steps),
        warnings=(),
        timings={"structure": 0.0, "evaluation": 0.0, "plan": 0.0},
    )
