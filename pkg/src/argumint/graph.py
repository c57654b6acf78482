"""Argument graph data model.

The structure-extraction stage returns a JSON document describing the essay's
argumentation: a main claim, a map of numbered atomic quotes, and a list of
support relations.  Relation entries come in two shapes:

* ``[id, target]`` -- an independent reason: the single source supports the
  target on its own.
* ``[[id1, id2, ...], target]`` -- joined reasons: the sources only work as
  support when all of them are present.

Quote id 0 is reserved and always refers to the main claim quote; every other
id must be a key of the quote map.  The directed graph with edges
``source -> target`` must be acyclic.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

MAIN_CLAIM_ID = 0

VALID = "valid"
INVALID = "invalid"
NO_FLAW = "none"


class AnalysisError(ValueError):
    """Base class for argument-analysis parsing and validation errors."""


class SchemaViolationError(AnalysisError):
    """The payload does not have the documented shape."""


class DanglingIdError(AnalysisError):
    """A relation references a quote id that is not in the quote map."""

    def __init__(self, quote_id: int):
        super().__init__(f"relation references unknown quote id {quote_id}")
        self.quote_id = quote_id


class CycleDetectedError(AnalysisError):
    """The support relations contain a cycle."""

    def __init__(self, nodes: tuple[int, ...]):
        super().__init__(f"support relations contain a cycle through {set(nodes)}")
        self.nodes = nodes


class UnknownIdError(AnalysisError):
    """A quote id does not resolve in the analysis."""


class EvaluationCoherenceError(AnalysisError):
    """A validity verdict violates the strength/label coherence rules."""


@dataclass(frozen=True)
class SupportRelation:
    """A directed support edge: ``sources`` jointly support ``target``.

    One source means an independent reason; two or more mean joined reasons
    that only work together.
    """

    sources: tuple[int, ...]
    target: int

    def __post_init__(self):
        if not self.sources:
            raise SchemaViolationError("relation has no sources")
        normalized = tuple(sorted(set(self.sources)))
        object.__setattr__(self, "sources", normalized)
        for qid in normalized + (self.target,):
            if not isinstance(qid, int) or isinstance(qid, bool) or qid < 0:
                raise SchemaViolationError(f"quote id must be a non-negative integer, got {qid!r}")
        if self.target in normalized:
            raise SchemaViolationError(f"relation {list(normalized)} -> {self.target} supports itself")

    @property
    def joined(self) -> bool:
        return len(self.sources) > 1

    def edges(self) -> list[tuple[int, int]]:
        return [(s, self.target) for s in self.sources]

    def identity(self) -> tuple[tuple[int, ...], int]:
        return (self.sources, self.target)


@dataclass(frozen=True)
class ArgumentAnalysis:
    """Parsed argument structure for one essay.

    ``claim_content`` paraphrases the author's position; ``claim_quote`` is
    the verbatim main-claim excerpt (empty string when the essay contains no
    argumentation, in which case ``quotes`` and ``relations`` are empty too).
    """

    claim_content: str
    claim_quote: str
    quotes: dict[int, str] = field(default_factory=dict)
    relations: tuple[SupportRelation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple(self.relations))
        object.__setattr__(self, "quotes", dict(self.quotes))

    @property
    def empty(self) -> bool:
        return self.claim_quote == ""

    def all_ids(self) -> set[int]:
        return {MAIN_CLAIM_ID, *self.quotes}

    def resolve_quote(self, quote_id: int) -> str:
        """Return the verbatim text behind a quote id (0 is the main claim)."""
        if quote_id == MAIN_CLAIM_ID:
            return self.claim_quote
        try:
            return self.quotes[quote_id]
        except KeyError:
            raise UnknownIdError(f"quote id {quote_id} does not resolve") from None


@dataclass(frozen=True)
class Evaluation:
    """Validity verdict for one support relation.

    ``rationale`` carries the step-by-step reasoning and must be written
    before the verdict; ``strength`` is ``valid`` exactly when ``label`` and
    ``label_long`` are ``none``.
    """

    claim: str
    evidence: tuple[str, ...]
    rationale: str
    strength: str
    rationale_short: str
    requirements: str
    label: str
    label_long: str

    def __post_init__(self):
        object.__setattr__(self, "evidence", tuple(self.evidence))
        label = _canonical_label(self.label)
        label_long = _canonical_label(self.label_long)
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "label_long", label_long)
        if self.strength not in (VALID, INVALID):
            raise EvaluationCoherenceError(f"strength must be valid/invalid, got {self.strength!r}")
        if not self.rationale.strip():
            raise EvaluationCoherenceError("rationale must be non-empty")
        is_valid = self.strength == VALID
        if (label == NO_FLAW) is not is_valid or (label_long == NO_FLAW) is not is_valid:
            raise EvaluationCoherenceError(
                f"strength={self.strength!r} is incoherent with label={label!r}, label_long={label_long!r}"
            )

    @classmethod
    def from_payload(cls, payload: Mapping) -> "Evaluation":
        """Build an Evaluation from the validity prompt's JSON output."""
        if not isinstance(payload, Mapping):
            raise SchemaViolationError("evaluation payload must be an object")
        try:
            inner = payload["evaluation"]
            claim = payload["claim"]
            evidence = payload["evidence"]
        except (KeyError, TypeError) as exc:
            raise SchemaViolationError(f"evaluation payload missing field: {exc}") from exc
        if isinstance(evidence, str):
            evidence = (evidence,)
        elif isinstance(evidence, (list, tuple)):
            evidence = tuple(str(e) for e in evidence)
        else:
            raise SchemaViolationError("evidence must be a string or list of strings")
        if not isinstance(inner, Mapping):
            raise SchemaViolationError("evaluation field must be an object")
        try:
            return cls(
                claim=str(claim),
                evidence=evidence,
                rationale=str(inner["rationale"]),
                strength=str(inner["strength"]),
                rationale_short=str(inner["rationale_short"]),
                requirements=str(inner["requirements"]),
                label=str(inner["label"]),
                label_long=str(inner["label_long"]),
            )
        except KeyError as exc:
            raise SchemaViolationError(f"evaluation missing field {exc}") from exc


def _canonical_label(label: str) -> str:
    text = label.strip()
    return NO_FLAW if text.lower() == NO_FLAW else text


@dataclass(frozen=True)
class EvaluatedAnalysis:
    """An analysis plus one validity verdict per support relation.

    ``evaluations`` is keyed by relation index; indices whose evaluation
    failed after retries are listed in ``failed``.  Together they cover every
    relation exactly once.
    """

    analysis: ArgumentAnalysis
    evaluations: dict[int, Evaluation]
    failed: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "evaluations", dict(self.evaluations))
        object.__setattr__(self, "failed", tuple(sorted(self.failed)))
        indices = set(range(len(self.analysis.relations)))
        got = set(self.evaluations) | set(self.failed)
        if set(self.evaluations) & set(self.failed):
            raise SchemaViolationError("a relation cannot be both evaluated and failed")
        if got != indices:
            raise SchemaViolationError(
                f"evaluations + failures must cover relation indices {sorted(indices)}, got {sorted(got)}"
            )

    def invalid_indices(self) -> list[int]:
        return sorted(i for i, ev in self.evaluations.items() if ev.strength == INVALID)


@dataclass(frozen=True)
class Violation:
    """One broken graph invariant; ``subject`` names the offending id(s)."""

    code: str
    message: str
    subject: object = None

    def __str__(self):
        return f"{self.code}: {self.message}"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_analysis(raw: str | Mapping, *, warnings: list[str] | None = None) -> ArgumentAnalysis:
    """Parse the structure-extraction JSON into an :class:`ArgumentAnalysis`.

    Accepts either the raw JSON text or an already-decoded mapping.  Duplicate
    relations are deduplicated with a warning (appended to ``warnings`` when a
    sink is given, logged otherwise).  Raises :class:`SchemaViolationError`,
    :class:`DanglingIdError` or :class:`CycleDetectedError` on bad input.
    """
    if isinstance(raw, str):
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SchemaViolationError(f"payload is not valid JSON: {exc}") from exc
    else:
        data = raw

    claim = _require_mapping(data, "claim")
    content = _require_str(claim, "content", allow_empty=True)
    claim_quote = _require_str(claim, "claim_quote", allow_empty=True)
    support = _require_mapping(claim, "support_relations")
    raw_quotes = support.get("quotes")
    raw_relations = support.get("relations")
    if not isinstance(raw_quotes, Mapping):
        raise SchemaViolationError("support_relations.quotes must be an object")
    if not isinstance(raw_relations, list):
        raise SchemaViolationError("support_relations.relations must be an array")

    quotes: dict[int, str] = {}
    for key, value in raw_quotes.items():
        qid = _coerce_quote_id(key)
        if qid == MAIN_CLAIM_ID:
            raise SchemaViolationError("quote id 0 is reserved for the main claim")
        if not isinstance(value, str):
            raise SchemaViolationError(f"quote {qid} must be a string")
        if not value:
            raise SchemaViolationError(f"quote {qid} is empty")
        quotes[qid] = value
    quotes = dict(sorted(quotes.items()))

    relations: list[SupportRelation] = []
    seen: set[tuple[tuple[int, ...], int]] = set()
    for entry in raw_relations:
        rel = _parse_relation(entry, warnings)
        for qid in rel.sources + (rel.target,):
            if qid != MAIN_CLAIM_ID and qid not in quotes:
                raise DanglingIdError(qid)
        if rel.identity() in seen:
            _warn(warnings, f"duplicate relation {list(rel.sources)} -> {rel.target} dropped")
            continue
        seen.add(rel.identity())
        relations.append(rel)

    if claim_quote == "" and (quotes or relations):
        raise SchemaViolationError("empty main claim requires empty quotes and relations")

    cycle = _find_cycle([e for rel in relations for e in rel.edges()])
    if cycle:
        raise CycleDetectedError(cycle)

    return ArgumentAnalysis(
        claim_content=content,
        claim_quote=claim_quote,
        quotes=quotes,
        relations=tuple(relations),
    )


def _parse_relation(entry: object, warnings: list[str] | None) -> SupportRelation:
    if not isinstance(entry, list) or len(entry) != 2:
        raise SchemaViolationError(f"relation entry must be a [source(s), target] pair, got {entry!r}")
    raw_sources, raw_target = entry
    target = _coerce_quote_id(raw_target)
    if isinstance(raw_sources, list):
        if not raw_sources:
            raise SchemaViolationError(f"relation {entry!r} has an empty source group")
        sources = tuple(_coerce_quote_id(s) for s in raw_sources)
        if len(sources) == 1:
            _warn(warnings, f"single-element source group {entry!r} treated as independent reason")
        elif len(set(sources)) < len(sources):
            _warn(warnings, f"repeated ids inside source group {entry!r} collapsed")
        if len(set(sources)) > 1 and MAIN_CLAIM_ID in sources:
            raise SchemaViolationError("the main claim (id 0) cannot be part of a joined source group")
    else:
        sources = (_coerce_quote_id(raw_sources),)
    return SupportRelation(sources=sources, target=target)


def _coerce_quote_id(value: object) -> int:
    # The model frequently emits map keys (and sometimes ids) as strings.
    if isinstance(value, bool):
        raise SchemaViolationError(f"quote id must be an integer, got {value!r}")
    if isinstance(value, int):
        qid = value
    elif isinstance(value, str):
        try:
            qid = int(value, 10)
        except ValueError:
            raise SchemaViolationError(f"non-numeric quote id {value!r}") from None
    else:
        raise SchemaViolationError(f"quote id must be an integer, got {value!r}")
    if qid < 0:
        raise SchemaViolationError(f"quote id must be non-negative, got {qid}")
    return qid


def _require_mapping(data: object, key: str) -> Mapping:
    if not isinstance(data, Mapping):
        raise SchemaViolationError(f"expected an object around {key!r}")
    value = data.get(key)
    if not isinstance(value, Mapping):
        raise SchemaViolationError(f"missing or non-object field {key!r}")
    return value


def _require_str(data: Mapping, key: str, *, allow_empty: bool) -> str:
    value = data.get(key)
    if not isinstance(value, str):
        raise SchemaViolationError(f"missing or non-string field {key!r}")
    if not value and not allow_empty:
        raise SchemaViolationError(f"field {key!r} is empty")
    return value


def _warn(sink: list[str] | None, message: str) -> None:
    if sink is not None:
        sink.append(message)
    else:
        logger.warning(message)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_graph(analysis: ArgumentAnalysis) -> list[Violation]:
    """Check every structural invariant; an empty list means the graph is sound.

    Violations are returned as values (never raised) so callers can report
    them all at once.
    """
    violations: list[Violation] = []

    if MAIN_CLAIM_ID in analysis.quotes:
        violations.append(
            Violation("reserved-id", "quote id 0 is reserved for the main claim", MAIN_CLAIM_ID)
        )
    for qid, text in analysis.quotes.items():
        if not text:
            violations.append(Violation("empty-quote-text", f"quote {qid} is empty", qid))

    if analysis.empty and (analysis.quotes or analysis.relations):
        violations.append(
            Violation("empty-argument", "empty main claim requires empty quotes and relations")
        )

    known = analysis.all_ids()
    edges: list[tuple[int, int]] = []
    for rel in analysis.relations:
        dangling = [qid for qid in rel.sources + (rel.target,) if qid not in known]
        for qid in dangling:
            violations.append(
                Violation("dangling-id", f"relation {list(rel.sources)} -> {rel.target} references unknown id {qid}", qid)
            )
        if not dangling:
            edges.extend(rel.edges())

    for scc in _cyclic_components(edges):
        violations.append(
            Violation("cycle-detected", f"support relations contain a cycle through {set(scc)}", scc)
        )
    return violations


def _find_cycle(edges: list[tuple[int, int]]) -> tuple[int, ...] | None:
    components = _cyclic_components(edges)
    return components[0] if components else None


def _cyclic_components(edges: list[tuple[int, int]]) -> list[tuple[int, ...]]:
    """Strongly connected components with more than one node (cycle witnesses)."""
    succ: dict[int, set[int]] = {}
    for s, t in edges:
        succ.setdefault(s, set()).add(t)
        succ.setdefault(t, set())

    index = 0
    indices: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    components: list[tuple[int, ...]] = []

    def strongconnect(root: int) -> None:
        nonlocal index
        work = [(root, iter(sorted(succ[root])))]
        indices[root] = low[root] = index
        index += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, successors = work[-1]
            advanced = False
            for nxt in successors:
                if nxt not in indices:
                    indices[nxt] = low[nxt] = index
                    index += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(sorted(succ[nxt]))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], indices[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == indices[node]:
                comp = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.append(member)
                    if member == node:
                        break
                if len(comp) > 1:
                    components.append(tuple(sorted(comp)))

    for node in sorted(succ):
        if node not in indices:
            strongconnect(node)
    components.sort()
    return components


# ---------------------------------------------------------------------------
# Support tracing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceNode:
    """One node of a support trace; each group holds the sources of one
    relation targeting this node, so joined reasons stay together."""

    quote_id: int
    groups: tuple[tuple["TraceNode", ...], ...] = ()

    @property
    def is_axiom(self) -> bool:
        return not self.groups

    def count_nodes(self) -> int:
        return 1 + sum(child.count_nodes() for group in self.groups for child in group)


def trace_to_axioms(analysis: ArgumentAnalysis, quote_id: int = MAIN_CLAIM_ID) -> TraceNode:
    """Expand the support chains feeding ``quote_id`` down to the axioms
    (quotes that no relation targets)."""
    if quote_id not in analysis.all_ids():
        raise UnknownIdError(f"quote id {quote_id} does not resolve")
    by_target: dict[int, list[SupportRelation]] = {}
    for rel in analysis.relations:
        by_target.setdefault(rel.target, []).append(rel)

    def build(node_id: int, path: frozenset[int]) -> TraceNode:
        if node_id in path:
            raise CycleDetectedError(tuple(sorted(path | {node_id})))
        groups = tuple(
            tuple(build(src, path | {node_id}) for src in rel.sources)
            for rel in by_target.get(node_id, [])
        )
        return TraceNode(quote_id=node_id, groups=groups)

    return build(quote_id, frozenset())


# ---------------------------------------------------------------------------
# Serialization (mirrors the structure-extraction JSON schema)
# ---------------------------------------------------------------------------


def relation_to_entry(rel: SupportRelation) -> list:
    if rel.joined:
        return [list(rel.sources), rel.target]
    return [rel.sources[0], rel.target]


def analysis_to_dict(analysis: ArgumentAnalysis) -> dict:
    return {
        "claim": {
            "content": analysis.claim_content,
            "claim_quote": analysis.claim_quote,
            "support_relations": {
                "quotes": {str(qid): text for qid, text in sorted(analysis.quotes.items())},
                "relations": [relation_to_entry(rel) for rel in analysis.relations],
            },
        }
    }


def analysis_to_json(analysis: ArgumentAnalysis) -> str:
    return json.dumps(analysis_to_dict(analysis), ensure_ascii=False, separators=(",", ":"))


def evaluation_to_dict(evaluation: Evaluation) -> dict:
    return {
        "claim": evaluation.claim,
        "evidence": list(evaluation.evidence),
        "evaluation": {
            "rationale": evaluation.rationale,
            "strength": evaluation.strength,
            "rationale_short": evaluation.rationale_short,
            "requirements": evaluation.requirements,
            "label": evaluation.label,
            "label_long": evaluation.label_long,
        },
    }


def evaluation_from_dict(data: Mapping) -> Evaluation:
    return Evaluation.from_payload(data)


def evaluated_to_dict(evaluated: EvaluatedAnalysis) -> dict:
    return {
        "analysis": analysis_to_dict(evaluated.analysis),
        "evaluations": {
            str(i): evaluation_to_dict(ev) for i, ev in sorted(evaluated.evaluations.items())
        },
        "failed": list(evaluated.failed),
    }


def evaluated_from_dict(data: Mapping) -> EvaluatedAnalysis:
    analysis = parse_analysis(data["analysis"])
    evaluations = {int(k): Evaluation.from_payload(v) for k, v in data["evaluations"].items()}
    return EvaluatedAnalysis(
        analysis=analysis,
        evaluations=evaluations,
        failed=tuple(data.get("failed", ())),
    )


def prune_ids(analysis: ArgumentAnalysis, dropped: set[int]) -> tuple[ArgumentAnalysis, list[SupportRelation]]:
    """Remove dropped quote ids and every relation touching them.

    Returns the pruned analysis and the relations that were removed.  The
    main-claim text is kept even when id 0 is dropped (it simply loses its
    anchor and relations).
    """
    if not dropped:
        return analysis, []
    kept_quotes = {qid: text for qid, text in analysis.quotes.items() if qid not in dropped}
    kept: list[SupportRelation] = []
    removed: list[SupportRelation] = []
    for rel in analysis.relations:
        if dropped.intersection(rel.sources) or rel.target in dropped:
            removed.append(rel)
        else:
            kept.append(rel)
    pruned = ArgumentAnalysis(
        claim_content=analysis.claim_content,
        claim_quote=analysis.claim_quote,
        quotes=kept_quotes,
        relations=tuple(kept),
    )
    return pruned, removed
