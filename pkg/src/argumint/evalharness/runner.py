"""Evaluation runs: structure accuracy against a gold essay corpus and
validity accuracy against converted inference pairs.

Items run sequentially so a fixed (corpus, n, seed, fixtures) tuple yields a
byte-identical report apart from run id and timestamp.  Per-item latency is
the completion latency reported by the gateway: declared fixture latency for
mock runs, final-attempt wall clock for real providers.
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..gateway import GatewayError, LlmGateway
from ..graph import MAIN_CLAIM_ID, AnalysisError, ArgumentAnalysis, SupportRelation
from ..pipeline import PipelineConfig, essay_key, evaluate_relation, extract_structure
from .aae import GoldEssay
from .metrics import latency_stats, main_claim_accuracy, relation_overlap, sample, validity_accuracy
from .snli import NliPair, ValidityItem, mini_essay, to_validity_gold


class RunFailedError(RuntimeError):
    """Every sampled item failed; there is nothing to report."""


@dataclass(frozen=True)
class MetricsReport:
    """Self-describing record of one evaluation run."""

    run_id: str
    created_at: float
    kind: str  # structure | validity
    config: dict
    sample_size: int
    seed: int
    metrics: dict
    latency_mean: float
    latency_stddev: float
    per_item: tuple[dict, ...]
    failures: int
    failure_detail: tuple[dict, ...] = ()
    excluded_neutral: int | None = None
    skipped_no_consensus: int | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        data = {
            "run_id": self.run_id,
            "created_at": self.created_at,
            "kind": self.kind,
            "config": self.config,
            "sample_size": self.sample_size,
            "seed": self.seed,
            "metrics": self.metrics,
            "latency_mean": self.latency_mean,
            "latency_stddev": self.latency_stddev,
            "per_item": list(self.per_item),
            "failures": self.failures,
            "failure_detail": list(self.failure_detail),
            "notes": self.notes,
        }
        if self.excluded_neutral is not None:
            data["excluded_neutral"] = self.excluded_neutral
        if self.skipped_no_consensus is not None:
            data["skipped_no_consensus"] = self.skipped_no_consensus
        return data

    def canonical_json(self) -> str:
        """Deterministic serialization: everything but run id and timestamp."""
        data = self.to_dict()
        data.pop("run_id")
        data.pop("created_at")
        return json.dumps(data, ensure_ascii=False, sort_keys=True, separators=(",", ":"))

    def table(self) -> str:
        """Human-readable summary table."""
        rows = [
            ("run", self.run_id),
            ("kind", self.kind),
            ("model", f"{self.config['model']['provider']}:{self.config['model']['model_name']}"),
            ("sample size", str(self.sample_size)),
            ("seed", str(self.seed)),
            ("failures", str(self.failures)),
        ]
        for name, value in sorted(self.metrics.items()):
            rows.append((name.replace("_", " "), f"{value:.4f}" if isinstance(value, float) else str(value)))
        rows.append(("latency mean (s)", f"{self.latency_mean:.3f}"))
        rows.append(("latency stddev (s)", f"{self.latency_stddev:.3f}"))
        if self.excluded_neutral is not None:
            rows.append(("excluded neutral", str(self.excluded_neutral)))
        if self.skipped_no_consensus is not None:
            rows.append(("skipped (no consensus)", str(self.skipped_no_consensus)))
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name.ljust(width)}  {value}" for name, value in rows)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )


def _report_config(config: PipelineConfig) -> dict:
    return {
        "model": config.model.snapshot(),
        "anchor_threshold": config.anchor_threshold,
        "concurrency": config.concurrency,
        "analysis_temperature": config.analysis_temperature,
        "socratic_temperature": config.socratic_temperature,
        "fingerprint": config.fingerprint(),
    }


def run_structure_eval(
    corpus: list[GoldEssay],
    n: int,
    seed: int,
    gateway: LlmGateway,
    config: PipelineConfig,
) -> MetricsReport:
    """Sample essays, extract their structure, and score main-claim accuracy
    plus relation overlap against the gold annotations."""
    chosen = sample(corpus, n, seed)
    latencies: list[float] = []
    item_records: list[float] = []
    observed = replace_observer(gateway, item_records)

    per_item: list[dict] = []
    failure_detail: list[dict] = []
    claim_runs = []
    recalls: list[float] = []
    for essay in chosen:
        item_records.clear()
        try:
            structure = extract_structure(essay.text, observed, config)
        except (GatewayError, AnalysisError, ValueError, RuntimeError) as exc:
            failure_detail.append({"essay_id": essay.essay_id, "error": str(exc)})
            continue
        latency = sum(item_records) if item_records else 0.0
        latencies.append(latency)
        claim_span = structure.anchors.get(MAIN_CLAIM_ID)
        claim_runs.append((claim_span, essay))
        scores = relation_overlap(structure.analysis, structure.anchors, essay)
        recalls.append(scores.recall)
        per_item.append(
            {
                "essay_id": essay.essay_id,
                "main_claim_anchored": claim_span is not None,
                "relation_recall": scores.recall,
                "relation_precision": scores.precision,
                "relation_f1": scores.f1,
                "gold_edges": scores.gold_edges,
                "predicted_edges": scores.predicted_edges,
                "latency": latency,
                "warnings": len(structure.warnings),
            }
        )

    if not per_item:
        raise RunFailedError(f"all {n} sampled essays failed structure extraction")

    mean_latency, stddev_latency = latency_stats(latencies)
    metrics = {
        "main_claim_accuracy": main_claim_accuracy(claim_runs),
        "relation_overlap_mean": sum(recalls) / len(recalls),
    }
    return MetricsReport(
        run_id=uuid.uuid4().hex,
        created_at=time.time(),
        kind="structure",
        config=_report_config(config),
        sample_size=n,
        seed=seed,
        metrics=metrics,
        latency_mean=mean_latency,
        latency_stddev=stddev_latency,
        per_item=tuple(per_item),
        failures=len(failure_detail),
        failure_detail=tuple(failure_detail),
        notes=_structure_notes(),
    )


def run_validity_eval(
    pairs: list[NliPair] | tuple[NliPair, ...],
    n: int,
    seed: int,
    gateway: LlmGateway,
    config: PipelineConfig,
    *,
    skipped_no_consensus: int = 0,
) -> MetricsReport:
    """Render sampled pairs as two-sentence essays and check the validity
    verdict against the converted gold label."""
    converted, excluded_neutral = to_validity_gold(list(pairs))
    chosen: list[ValidityItem] = sample(converted, n, seed)

    item_records: list[float] = []
    observed = replace_observer(gateway, item_records)

    per_item: list[dict] = []
    failure_detail: list[dict] = []
    verdicts: list[tuple[str, str]] = []
    latencies: list[float] = []
    for index, item in enumerate(chosen):
        essay, premise_sentence, hypothesis_sentence = mini_essay(item.premise, item.hypothesis)
        analysis = ArgumentAnalysis(
            claim_content=item.hypothesis,
            claim_quote=hypothesis_sentence,
            quotes={1: premise_sentence},
            relations=(SupportRelation(sources=(1,), target=MAIN_CLAIM_ID),),
        )
        item_records.clear()
        try:
            evaluation = evaluate_relation(
                essay,
                analysis,
                analysis.relations[0],
                observed,
                config,
                fixture_key=f"validity-{essay_key(essay)}-r0",
            )
        except (GatewayError, AnalysisError) as exc:
            failure_detail.append({"index": index, "error": str(exc)})
            continue
        latency = sum(item_records) if item_records else 0.0
        latencies.append(latency)
        verdicts.append((evaluation.strength, item.gold_strength))
        per_item.append(
            {
                "index": index,
                "strength": evaluation.strength,
                "gold": item.gold_strength,
                "correct": evaluation.strength == item.gold_strength,
                "latency": latency,
            }
        )

    if not per_item:
        raise RunFailedError(f"all {n} sampled pairs failed evaluation")

    mean_latency, stddev_latency = latency_stats(latencies)
    metrics = {"validity_accuracy": validity_accuracy(verdicts)}
    return MetricsReport(
        run_id=uuid.uuid4().hex,
        created_at=time.time(),
        kind="validity",
        config=_report_config(config),
        sample_size=n,
        seed=seed,
        metrics=metrics,
        latency_mean=mean_latency,
        latency_stddev=stddev_latency,
        per_item=tuple(per_item),
        failures=len(failure_detail),
        failure_detail=tuple(failure_detail),
        excluded_neutral=excluded_neutral,
        skipped_no_consensus=skipped_no_consensus,
        notes=_validity_notes(),
    )


def replace_observer(gateway: LlmGateway, sink: list[float]) -> LlmGateway:
    """Gateway clone whose completions report their latency into ``sink``."""
    return replace(gateway, observer=lambda record: sink.append(record.latency))


def _structure_notes() -> dict:
    return {
        "latency": "sum of completion latencies per essay; final-attempt wall clock "
        "for HTTP providers, declared latency for mock fixtures",
        "latency_estimator": "population standard deviation (n divisor)",
        "relation_overlap": "recall of gold supports edges after span matching; "
        "precision and F1 recorded per item; attacks edges excluded",
        "component_matching": "argmax span IoU, minimum 0.5, gold reuse allowed, "
        "main-claim components collapsed into one node",
        "sampling_unit": "essay",
    }


def _validity_notes() -> dict:
    return {
        "latency": "sum of completion latencies per pair",
        "latency_estimator": "population standard deviation (n divisor)",
        "gold_mapping": "entailment=valid, contradiction=invalid, neutral excluded before sampling",
        "sampling_unit": "pair",
        "essay_template": "'<premise>. Therefore, <hypothesis>.'",
    }
