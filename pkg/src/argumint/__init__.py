"""Argument-aware writing feedback: structure extraction, validity checking,
and Socratic revision coaching for argumentative essays."""

from .anchoring import AnchoredSpan, AnchorError, anchor_all, anchor_quote
from .gateway import CompletionRecord, LlmGateway, ModelConfig, build_provider, repair_json
from .graph import (
    ArgumentAnalysis,
    EvaluatedAnalysis,
    Evaluation,
    SupportRelation,
    parse_analysis,
    trace_to_axioms,
    validate_graph,
)
from .pipeline import Plan, PlanStep, PipelineConfig, PipelineResult, run_pipeline
from .session import CommentMarker, SessionState, SocraticEngine

__version__ = "0.1.0"

__all__ = [
    "AnchoredSpan",
    "AnchorError",
    "anchor_all",
    "anchor_quote",
    "CompletionRecord",
    "LlmGateway",
    "ModelConfig",
    "build_provider",
    "repair_json",
    "ArgumentAnalysis",
    "EvaluatedAnalysis",
    "Evaluation",
    "SupportRelation",
    "parse_analysis",
    "trace_to_axioms",
    "validate_graph",
    "Plan",
    "PlanStep",
    "PipelineConfig",
    "PipelineResult",
    "run_pipeline",
    "CommentMarker",
    "SessionState",
    "SocraticEngine",
    "__version__",
]
