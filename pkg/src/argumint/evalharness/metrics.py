"""Pure metric computations for the evaluation harness.

Every metric here has a brute-force counterpart in the test suite (interval
arithmetic, set intersection, direct counting); keep these implementations
free of I/O and randomness beyond the seeded sampler.
"""

from __future__ import annotations

import random
import statistics
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from ..anchoring import AnchoredSpan
from ..graph import INVALID, VALID, ArgumentAnalysis
from .aae import Component, GoldEssay

MATCH_MIN_IOU = 0.5

# Collapsed node label for any main-claim component: predictions carry a
# single main-claim id while the gold side may annotate the thesis twice
# (intro and conclusion), so all of those compare equal.
MAIN_CLAIM_NODE = "MC"


def sample(items: Sequence, n: int, seed: int) -> list:
    """Uniform sample without replacement, deterministic for a fixed seed."""
    if n > len(items):
        raise ValueError(f"cannot sample {n} from {len(items)} items")
    return random.Random(seed).sample(list(items), n)


def span_iou(start_a: int, end_a: int, start_b: int, end_b: int) -> float:
    intersection = max(0, min(end_a, end_b) - max(start_a, start_b))
    union = max(end_a, end_b) - min(start_a, start_b)
    if union <= 0:
        return 0.0
    return intersection / union


def match_components(
    anchors: Mapping[int, AnchoredSpan],
    gold: GoldEssay,
    *,
    kinds: tuple[str, ...] | None = None,
) -> dict[int, str | None]:
    """Match each predicted span to the gold component maximizing span IoU.

    Matches below an IoU of 0.5 become ``None`` (unmatched); several
    predictions may reuse one gold component.  ``kinds`` restricts the
    candidate components.
    """
    candidates = [
        c for c in gold.components.values() if kinds is None or c.kind in kinds
    ]
    matched: dict[int, str | None] = {}
    for qid, span in sorted(anchors.items()):
        best: Component | None = None
        best_iou = 0.0
        for comp in sorted(candidates, key=lambda c: (c.start, c.end, c.component_id)):
            iou = span_iou(span.start, span.end, comp.start, comp.end)
            if iou > best_iou:
                best_iou = iou
                best = comp
        matched[qid] = best.component_id if best is not None and best_iou >= MATCH_MIN_IOU else None
    return matched


def main_claim_accuracy(runs: Sequence[tuple[AnchoredSpan | None, GoldEssay]]) -> float:
    """Fraction of essays whose predicted main-claim span matches any gold
    MajorClaim component (IoU >= 0.5 against MajorClaims only)."""
    if not runs:
        raise ValueError("main_claim_accuracy needs at least one run")
    hits = 0
    for span, gold in runs:
        if span is None:
            continue
        matched = match_components({0: span}, gold, kinds=("MajorClaim",))
        if matched[0] is not None:
            hits += 1
    return hits / len(runs)


@dataclass(frozen=True)
class OverlapScores:
    recall: float
    precision: float
    f1: float
    matched_edges: int
    gold_edges: int
    predicted_edges: int


def relation_overlap(
    analysis: ArgumentAnalysis,
    anchors: Mapping[int, AnchoredSpan],
    gold: GoldEssay,
) -> OverlapScores:
    """Recall of the gold ``supports`` edges by the predicted relations.

    Predicted quote ids map onto gold components via span matching; any
    main-claim component collapses to one node.  Joined relations expand to
    one edge per source.  Relations touching unmatched ids contribute
    nothing.  Precision and F1 ride along so other overlap readings stay
    recoverable.
    """
    matched = match_components(anchors, gold)

    def canonical(component_id: str | None) -> str | None:
        if component_id is None:
            return None
        comp = gold.components[component_id]
        return MAIN_CLAIM_NODE if comp.kind == "MajorClaim" else component_id

    predicted: set[tuple[str, str]] = set()
    for rel in analysis.relations:
        target = canonical(matched.get(rel.target))
        if target is None:
            continue
        for source_id in rel.sources:
            source = canonical(matched.get(source_id))
            if source is None:
                continue
            predicted.add((source, target))

    reference: set[tuple[str, str]] = set()
    for source_id, target_id in gold.supports_edges():
        reference.add((canonical(source_id), canonical(target_id)))

    hit = len(predicted & reference)
    recall = hit / len(reference) if reference else 1.0
    precision = hit / len(predicted) if predicted else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return OverlapScores(
        recall=recall,
        precision=precision,
        f1=f1,
        matched_edges=hit,
        gold_edges=len(reference),
        predicted_edges=len(predicted),
    )


def validity_accuracy(verdicts: Sequence[tuple[str, str]]) -> float:
    """Agreement between predicted strength and gold: valid pairs with
    entailment, invalid with contradiction."""
    if not verdicts:
        raise ValueError("validity_accuracy needs at least one verdict")
    hits = 0
    for strength, gold_label in verdicts:
        gold = _gold_to_strength(gold_label)
        if strength not in (VALID, INVALID):
            raise ValueError(f"unknown strength {strength!r}")
        if strength == gold:
            hits += 1
    return hits / len(verdicts)


def _gold_to_strength(label: str) -> str:
    if label in (VALID, INVALID):
        return label
    if label == "entailment":
        return VALID
    if label == "contradiction":
        return INVALID
    raise ValueError(f"gold label {label!r} has no binary validity reading")


def latency_stats(samples: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and population standard deviation (n divisor)."""
    if not samples:
        raise ValueError("latency_stats needs at least one sample")
    return statistics.fmean(samples), statistics.pstdev(samples)
