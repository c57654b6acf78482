"""Staged analysis pipeline: structure extraction, per-relation validity
evaluation, and revision-plan generation.

Stages are strictly separated: extraction output is immutable input to
evaluation, and evaluation never alters the graph.  Relations are evaluated
independently (bounded fan-out) and aggregated by relation identity, so
completion order never changes the result.  Partial evaluation failures
degrade gracefully: the writer still gets feedback on evaluable relations.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from . import prompts
from .anchoring import DEFAULT_THRESHOLD, AnchorError, AnchoredSpan, anchor_all, anchor_quote
from .gateway import GatewayError, LlmGateway, ModelConfig, config_fingerprint
from .graph import (
    AnalysisError,
    ArgumentAnalysis,
    EvaluatedAnalysis,
    Evaluation,
    SupportRelation,
    analysis_to_dict,
    evaluated_from_dict,
    evaluated_to_dict,
    parse_analysis,
    prune_ids,
    validate_graph,
)

logger = logging.getLogger(__name__)

STAGE_STRUCTURE = "structure"
STAGE_EVALUATION = "evaluation"
STAGE_PLAN = "plan"


class PipelineError(RuntimeError):
    """Hard pipeline failure, tagged with the stage that broke."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage} stage failed: {message}")
        self.stage = stage


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a pipeline run depends on besides the essay itself."""

    model: ModelConfig = field(default_factory=ModelConfig)
    anchor_threshold: float = DEFAULT_THRESHOLD
    concurrency: int = 4
    analysis_temperature: float = 0.0
    socratic_temperature: float = 0.7

    def stage_model(self, prompt_id: str) -> ModelConfig:
        # Analysis stages run deterministic; dialogue turns stay conversational.
        temperature = (
            self.socratic_temperature
            if prompt_id == prompts.PROMPT_SOCRATIC
            else self.analysis_temperature
        )
        return replace(self.model, temperature=temperature)

    def fingerprint(self) -> str:
        return config_fingerprint(
            self.model,
            extra={
                "anchor_threshold": self.anchor_threshold,
                "concurrency": self.concurrency,
                "analysis_temperature": self.analysis_temperature,
                "socratic_temperature": self.socratic_temperature,
            },
        )


def essay_key(essay: str) -> str:
    """Stable short key for fixture lookup and persistence names."""
    return hashlib.sha256(essay.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class PlanStep:
    """One revision-plan step, anchored and tied to the invalid relation it
    addresses."""

    step_number: int
    description: str
    target_text: str
    issue: str
    relation_index: int
    anchor: AnchoredSpan

    def to_dict(self) -> dict:
        return {
            "step_number": self.step_number,
            "description": self.description,
            "target_text": self.target_text,
            "issue": self.issue,
            "relation_index": self.relation_index,
            "anchor": self.anchor.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PlanStep":
        return cls(
            step_number=int(data["step_number"]),
            description=str(data["description"]),
            target_text=str(data["target_text"]),
            issue=str(data["issue"]),
            relation_index=int(data["relation_index"]),
            anchor=AnchoredSpan.from_dict(data["anchor"]),
        )


@dataclass(frozen=True)
class Plan:
    steps: tuple[PlanStep, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        numbers = [s.step_number for s in self.steps]
        if numbers != list(range(1, len(numbers) + 1)):
            raise ValueError(f"step numbers must be 1..n contiguous, got {numbers}")

    def to_dict(self) -> dict:
        return {"steps": [s.to_dict() for s in self.steps]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Plan":
        return cls(steps=tuple(PlanStep.from_dict(s) for s in data.get("steps", [])))


@dataclass(frozen=True)
class StructureResult:
    analysis: ArgumentAnalysis
    anchors: dict[int, AnchoredSpan]
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class PipelineResult:
    """Self-contained outcome of one analysis run."""

    essay: str
    analysis: ArgumentAnalysis
    anchors: dict[int, AnchoredSpan]
    evaluated: EvaluatedAnalysis
    plan: Plan
    warnings: tuple[str, ...] = ()
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def empty_argument(self) -> bool:
        return self.analysis.empty

    def to_dict(self, *, include_timings: bool = True) -> dict:
        data = {
            "essay": self.essay,
            "analysis": analysis_to_dict(self.analysis),
            "anchors": {str(qid): span.to_dict() for qid, span in sorted(self.anchors.items())},
            "evaluated": evaluated_to_dict(self.evaluated),
            "plan": self.plan.to_dict(),
            "warnings": list(self.warnings),
            "empty_argument": self.empty_argument,
        }
        if include_timings:
            data["timings"] = dict(self.timings)
        return data

    def canonical_json(self) -> str:
        """Deterministic serialization; timings are excluded because they are
        wall-clock measurements, everything else is reproducible."""
        return json.dumps(
            self.to_dict(include_timings=False),
            ensure_ascii=False,
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_dict(cls, data: Mapping) -> "PipelineResult":
        return cls(
            essay=str(data["essay"]),
            analysis=parse_analysis(data["analysis"]),
            anchors={
                int(qid): AnchoredSpan.from_dict(span) for qid, span in data["anchors"].items()
            },
            evaluated=evaluated_from_dict(data["evaluated"]),
            plan=Plan.from_dict(data["plan"]),
            warnings=tuple(data.get("warnings", ())),
            timings=dict(data.get("timings", {})),
        )


# ---------------------------------------------------------------------------
# Stage 1: structure extraction
# ---------------------------------------------------------------------------


def extract_structure(
    essay: str,
    gateway: LlmGateway,
    config: PipelineConfig,
) -> StructureResult:
    """Extract and anchor the argument graph.

    Quotes that cannot be anchored are dropped together with every relation
    touching them; each drop is recorded as a warning.  An empty main claim
    is a legal outcome (no argumentation found) and returns an empty result.
    """
    if not essay.strip():
        raise ValueError("essay must be non-empty")
    key = essay_key(essay)
    prompt = prompts.render_structure_prompt(essay)
    record = gateway.complete_json(
        prompt,
        prompts.STRUCTURE_SCHEMA,
        config.stage_model(prompts.PROMPT_STRUCTURE),
        prompt_id=prompts.PROMPT_STRUCTURE,
        fixture_key=f"structure-{key}",
        check=lambda parsed: parse_analysis(parsed, warnings=[]),
    )
    warnings: list[str] = []
    analysis = parse_analysis(record.parsed, warnings=warnings)
    if analysis.empty:
        return StructureResult(analysis=analysis, anchors={}, warnings=tuple(warnings))

    anchors, dropped = anchor_all(essay, analysis, config.anchor_threshold)
    if dropped:
        for qid in dropped:
            warnings.append(f"dropped-quote: id {qid} could not be anchored in the essay")
        analysis, removed = prune_ids(analysis, set(dropped))
        for rel in removed:
            warnings.append(
                f"dropped-relation: {list(rel.sources)} -> {rel.target} lost an anchored endpoint"
            )
    violations = validate_graph(analysis)
    if violations:
        raise PipelineError(STAGE_STRUCTURE, f"graph invalid after pruning: {violations[0]}")
    return StructureResult(analysis=analysis, anchors=anchors, warnings=tuple(warnings))


# ---------------------------------------------------------------------------
# Stage 2: validity evaluation
# ---------------------------------------------------------------------------

COHERENCE_FEEDBACK = (
    "\n\nYour previous evaluation was rejected: {error}\n"
    'Remember: "strength" must be "valid" exactly when "label" and "label_long" are "none", '
    'and the rationale must not be empty. Reply again with only the JSON document.'
)


def evaluate_relation(
    essay: str,
    analysis: ArgumentAnalysis,
    relation: SupportRelation,
    gateway: LlmGateway,
    config: PipelineConfig,
    *,
    fixture_key: str | None = None,
    warnings: list[str] | None = None,
) -> Evaluation:
    """Evaluate one support relation's logical validity.

    Joined relations are a single call whose evidence lists every joined
    source together.  An incoherent verdict earns exactly one corrective
    retry before failing.
    """
    target_text = analysis.resolve_quote(relation.target)
    evidence_texts = [analysis.resolve_quote(src) for src in relation.sources]
    prompt = prompts.render_validity_prompt(target_text, evidence_texts, essay)
    model = config.stage_model(prompts.PROMPT_VALIDITY)
    record = gateway.complete_json(
        prompt,
        prompts.VALIDITY_SCHEMA,
        model,
        prompt_id=prompts.PROMPT_VALIDITY,
        fixture_key=fixture_key,
    )
    try:
        evaluation = Evaluation.from_payload(record.parsed)
    except AnalysisError as exc:
        retry_prompt = prompt + COHERENCE_FEEDBACK.format(error=str(exc)[:200])
        retry_key = f"{fixture_key}-retry" if fixture_key else None
        record = gateway.complete_json(
            retry_prompt,
            prompts.VALIDITY_SCHEMA,
            model,
            prompt_id=prompts.PROMPT_VALIDITY,
            fixture_key=retry_key,
        )
        evaluation = Evaluation.from_payload(record.parsed)

    _check_evidence_against_graph(evaluation, evidence_texts, target_text, warnings)
    return evaluation


def _check_evidence_against_graph(
    evaluation: Evaluation,
    evidence_texts: list[str],
    target_text: str,
    warnings: list[str] | None,
) -> None:
    # The model selects its own evidence text; mismatches against the graph
    # are worth a warning but never fail the evaluation.
    if warnings is None:
        return
    from difflib import SequenceMatcher

    known = evidence_texts + [target_text]
    for returned in evaluation.evidence:
        candidate = returned.strip()
        if not candidate:
            continue
        close = any(
            candidate in text
            or text in candidate
            or SequenceMatcher(None, candidate, text).ratio() >= 0.8
            for text in known
        )
        if not close:
            warnings.append(
                f"evidence-mismatch: model cited {candidate[:60]!r} which is not in the relation's evidence"
            )


def evaluate_all(
    essay: str,
    analysis: ArgumentAnalysis,
    anchors: dict[int, AnchoredSpan],
    gateway: LlmGateway,
    config: PipelineConfig,
) -> tuple[EvaluatedAnalysis, list[str]]:
    """Evaluate every relation with bounded concurrency.

    Results are keyed by relation index, never by completion order.  Failures
    after retries land in ``failed`` and a warning; the rest proceed.
    """
    warnings: list[str] = []
    missing = [
        i
        for i, rel in enumerate(analysis.relations)
        if any(qid not in anchors for qid in rel.sources + (rel.target,))
    ]
    if missing:
        raise PipelineError(STAGE_EVALUATION, f"relations {missing} have unanchored endpoints")

    key = essay_key(essay)
    relations = list(enumerate(analysis.relations))
    evaluations: dict[int, Evaluation] = {}
    failed: list[int] = []
    per_relation_warnings: dict[int, list[str]] = {i: [] for i, _ in relations}

    def work(index: int, relation: SupportRelation) -> Evaluation:
        return evaluate_relation(
            essay,
            analysis,
            relation,
            gateway,
            config,
            fixture_key=f"validity-{key}-r{index}",
            warnings=per_relation_warnings[index],
        )

    if relations:
        workers = max(1, min(config.concurrency, len(relations)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {i: pool.submit(work, i, rel) for i, rel in relations}
        for i, future in sorted(futures.items()):
            try:
                evaluations[i] = future.result()
            except (GatewayError, AnalysisError) as exc:
                failed.append(i)
                warnings.append(f"evaluation-failed: relation {i}: {exc}")
    for i in sorted(per_relation_warnings):
        warnings.extend(per_relation_warnings[i])
    evaluated = EvaluatedAnalysis(analysis=analysis, evaluations=evaluations, failed=tuple(failed))
    return evaluated, warnings


# ---------------------------------------------------------------------------
# Stage 3: plan generation
# ---------------------------------------------------------------------------


def generate_plan(
    essay: str,
    evaluated: EvaluatedAnalysis,
    anchors: dict[int, AnchoredSpan],
    gateway: LlmGateway,
    config: PipelineConfig,
    *,
    warnings: list[str] | None = None,
) -> Plan:
    """Turn the invalid relations into an ordered revision plan.

    Steps the model proposes are kept only when their target text anchors in
    the essay and overlaps an invalid relation's endpoints; everything else
    is dropped with a warning.  With zero invalid relations the plan is empty
    and no model call is made.
    """
    sink = warnings if warnings is not None else []
    invalid = evaluated.invalid_indices()
    if not invalid:
        return Plan(())

    prompt = prompts.render_plan_prompt(evaluated_to_dict(evaluated))
    record = gateway.complete_json(
        prompt,
        prompts.PLAN_SCHEMA,
        config.stage_model(prompts.PROMPT_PLAN),
        prompt_id=prompts.PROMPT_PLAN,
        fixture_key=f"plan-{essay_key(essay)}",
    )

    invalid_spans: dict[int, list[AnchoredSpan]] = {}
    for index in invalid:
        rel = evaluated.analysis.relations[index]
        spans = [anchors[qid] for qid in rel.sources + (rel.target,) if qid in anchors]
        invalid_spans[index] = spans

    steps: list[PlanStep] = []
    for raw_step in record.parsed.get("steps", []):
        target_text = str(raw_step["targetText"])
        try:
            span = anchor_quote(essay, target_text, config.anchor_threshold)
        except (AnchorError, ValueError):
            sink.append(f"plan-step-dropped: target text {target_text[:60]!r} does not anchor")
            continue
        relation_index = _associate_step(span, invalid_spans)
        if relation_index is None:
            sink.append(
                f"plan-step-dropped: target text {target_text[:60]!r} does not touch an invalid relation"
            )
            continue
        steps.append(
            PlanStep(
                step_number=len(steps) + 1,
                description=str(raw_step["description"]),
                target_text=target_text,
                issue=str(raw_step["issue"]),
                relation_index=relation_index,
                anchor=span,
            )
        )
    return Plan(tuple(steps))


def _associate_step(
    span: AnchoredSpan, invalid_spans: dict[int, list[AnchoredSpan]]
) -> int | None:
    best_index = None
    best_overlap = 0
    for index, spans in sorted(invalid_spans.items()):
        overlap = max((span.overlap(s) for s in spans), default=0)
        if overlap > best_overlap:
            best_overlap = overlap
            best_index = index
    return best_index


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------


def run_pipeline(essay: str, gateway: LlmGateway, config: PipelineConfig) -> PipelineResult:
    """Run all three stages and assemble a :class:`PipelineResult`."""
    timings: dict[str, float] = {}

    started = time.perf_counter()
    try:
        structure = extract_structure(essay, gateway, config)
    except GatewayError as exc:
        raise PipelineError(STAGE_STRUCTURE, str(exc)) from exc
    timings[STAGE_STRUCTURE] = time.perf_counter() - started
    warnings = list(structure.warnings)
    analysis = structure.analysis

    if analysis.empty:
        return PipelineResult(
            essay=essay,
            analysis=analysis,
            anchors={},
            evaluated=EvaluatedAnalysis(analysis=analysis, evaluations={}),
            plan=Plan(()),
            warnings=tuple(warnings),
            timings={**timings, STAGE_EVALUATION: 0.0, STAGE_PLAN: 0.0},
        )

    started = time.perf_counter()
    evaluated, eval_warnings = evaluate_all(essay, analysis, structure.anchors, gateway, config)
    timings[STAGE_EVALUATION] = time.perf_counter() - started
    warnings.extend(eval_warnings)

    started = time.perf_counter()
    try:
        plan = generate_plan(
            essay, evaluated, structure.anchors, gateway, config, warnings=warnings
        )
    except GatewayError as exc:
        raise PipelineError(STAGE_PLAN, str(exc)) from exc
    timings[STAGE_PLAN] = time.perf_counter() - started

    return PipelineResult(
        essay=essay,
        analysis=analysis,
        anchors=structure.anchors,
        evaluated=evaluated,
        plan=plan,
        warnings=tuple(warnings),
        timings=timings,
    )
