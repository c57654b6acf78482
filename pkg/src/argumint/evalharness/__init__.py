"""Evaluation harness: corpus loaders, metrics, and run orchestration."""

from .aae import Component, CorpusParseError, GoldEssay, GoldRelation, SpanMismatchError, load_aae_corpus
from .metrics import (
    OverlapScores,
    latency_stats,
    main_claim_accuracy,
    match_components,
    relation_overlap,
    sample,
    validity_accuracy,
)
from .runner import MetricsReport, RunFailedError, run_structure_eval, run_validity_eval
from .snli import NliPair, SnliLoadResult, SnliParseError, load_snli, mini_essay, to_validity_gold

__all__ = [
    "Component",
    "CorpusParseError",
    "GoldEssay",
    "GoldRelation",
    "SpanMismatchError",
    "load_aae_corpus",
    "OverlapScores",
    "latency_stats",
    "main_claim_accuracy",
    "match_components",
    "relation_overlap",
    "sample",
    "validity_accuracy",
    "MetricsReport",
    "RunFailedError",
    "run_structure_eval",
    "run_validity_eval",
    "NliPair",
    "SnliLoadResult",
    "SnliParseError",
    "load_snli",
    "mini_essay",
    "to_validity_gold",
]
