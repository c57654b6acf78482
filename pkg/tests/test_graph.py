"""Argument-graph parsing, validation, tracing, and serialization."""

from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from argumint.graph import (
    ArgumentAnalysis,
    CycleDetectedError,
    DanglingIdError,
    EvaluatedAnalysis,
    Evaluation,
    EvaluationCoherenceError,
    SchemaViolationError,
    SupportRelation,
    UnknownIdError,
    analysis_to_dict,
    analysis_to_json,
    parse_analysis,
    trace_to_axioms,
    validate_graph,
)

INDEPENDENT_DOC = (
    '{"claim":{"content":"c","claim_quote":"Q0",'
    '"support_relations":{"quotes":{"1":"Q1"},"relations":[[1,0]]}}}'
)


def make_analysis(quotes: dict[int, str], relations: list, claim_quote: str = "Q0") -> ArgumentAnalysis:
    return ArgumentAnalysis(
        claim_content="c",
        claim_quote=claim_quote,
        quotes=quotes,
        relations=tuple(SupportRelation(sources=tuple(s), target=t) for s, t in relations),
    )


class TestParseAnalysis:
    def test_independent_relation(self):
        analysis = parse_analysis(INDEPENDENT_DOC)
        assert analysis.claim_quote == "Q0"
        assert analysis.quotes == {1: "Q1"}
        assert analysis.relations == (SupportRelation(sources=(1,), target=0),)
        assert not analysis.relations[0].joined

    def test_joined_relation(self):
        doc = {
            "claim": {
                "content": "c",
                "claim_quote": "Q0",
                "support_relations": {
                    "quotes": {"2": "Q2", "3": "Q3"},
                    "relations": [[[2, 3], 0]],
                },
            }
        }
        analysis = parse_analysis(json.dumps(doc))
        (rel,) = analysis.relations
        assert rel.sources == (2, 3)
        assert rel.target == 0
        assert rel.joined

    def test_empty_argument_is_legal(self):
        doc = {
            "claim": {
                "content": "",
                "claim_quote": "",
                "support_relations": {"quotes": {}, "relations": []},
            }
        }
        analysis = parse_analysis(doc)
        assert analysis.empty
        assert analysis.quotes == {}
        assert analysis.relations == ()

    def test_two_cycle_rejected(self):
        doc = {
            "claim": {
                "content": "c",
                "claim_quote": "Q0",
                "support_relations": {"quotes": {"1": "Q1"}, "relations": [[1, 0], [0, 1]]},
            }
        }
        with pytest.raises(CycleDetectedError):
            parse_analysis(doc)

    def test_dangling_id(self):
        doc = {
            "claim": {
                "content": "c",
                "claim_quote": "Q0",
                "support_relations": {"quotes": {"1": "Q1"}, "relations": [[7, 0]]},
            }
        }
        with pytest.raises(DanglingIdError) as err:
            parse_analysis(doc)
        assert err.value.quote_id == 7

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.pop("claim"),
            lambda d: d["claim"].pop("claim_quote"),
            lambda d: d["claim"].pop("support_relations"),
            lambda d: d["claim"]["support_relations"].pop("quotes"),
            lambda d: d["claim"]["support_relations"].__setitem__("relations", {"0": [1, 0]}),
            lambda d: d["claim"]["support_relations"]["quotes"].__setitem__("x1", "text"),
            lambda d: d["claim"]["support_relations"]["quotes"].__setitem__("0", "text"),
            lambda d: d["claim"]["support_relations"]["quotes"].__setitem__("2", ""),
            lambda d: d["claim"]["support_relations"]["relations"].append([1, 1]),
            lambda d: d["claim"]["support_relations"]["relations"].append([[0, 1], 0]),
            lambda d: d["claim"]["support_relations"]["relations"].append([True, 0]),
            lambda d: d["claim"]["support_relations"]["relations"].append([1, 0, 2]),
            lambda d: d["claim"]["support_relations"]["relations"].append([[], 0]),
        ],
    )
    def test_schema_violations(self, mutate):
        doc = json.loads(INDEPENDENT_DOC)
        mutate(doc)
        with pytest.raises(SchemaViolationError):
            parse_analysis(doc)

    def test_empty_claim_with_content_rejected(self):
        doc = json.loads(INDEPENDENT_DOC)
        doc["claim"]["claim_quote"] = ""
        with pytest.raises(SchemaViolationError):
            parse_analysis(doc)

    def test_string_ids_coerced(self):
        doc = {
            "claim": {
                "content": "c",
                "claim_quote": "Q0",
                "support_relations": {"quotes": {"1": "Q1"}, "relations": [["1", "0"]]},
            }
        }
        analysis = parse_analysis(doc)
        assert analysis.relations[0] == SupportRelation(sources=(1,), target=0)

    def test_duplicate_relations_deduplicated_with_warning(self):
        doc = {
            "claim": {
                "content": "c",
                "claim_quote": "Q0",
                "support_relations": {
                    "quotes": {"1": "Q1"},
                    "relations": [[1, 0], [1, 0]],
                },
            }
        }
        warnings: list[str] = []
        analysis = parse_analysis(doc, warnings=warnings)
        assert len(analysis.relations) == 1
        assert any("duplicate relation" in w for w in warnings)

    def test_single_element_group_is_independent(self):
        doc = {
            "claim": {
                "content": "c",
                "claim_quote": "Q0",
                "support_relations": {"quotes": {"1": "Q1"}, "relations": [[[1], 0]]},
            }
        }
        warnings: list[str] = []
        analysis = parse_analysis(doc, warnings=warnings)
        assert analysis.relations[0].sources == (1,)
        assert not analysis.relations[0].joined
        assert warnings

    def test_invalid_json_text(self):
        with pytest.raises(SchemaViolationError):
            parse_analysis("{not json")


class TestValidateGraph:
    def test_valid_analysis_has_no_violations(self):
        analysis = parse_analysis(INDEPENDENT_DOC)
        assert validate_graph(analysis) == []

    def test_dangling_id_violation(self):
        analysis = make_analysis({1: "Q1"}, [((7,), 0)])
        violations = validate_graph(analysis)
        assert [v.code for v in violations] == ["dangling-id"]
        assert violations[0].subject == 7

    def test_cycle_violation_names_the_component(self):
        analysis = make_analysis({1: "Q1", 2: "Q2"}, [((1,), 2), ((2,), 1)])
        violations = validate_graph(analysis)
        cycle = [v for v in violations if v.code == "cycle-detected"]
        assert len(cycle) == 1
        assert cycle[0].subject == (1, 2)
        edges = [(1, 2), (2, 1)]
        assert oracles.has_cycle_by_permutations([1, 2], edges)

    def test_reserved_id_zero_in_quote_map(self):
        analysis = make_analysis({0: "bad", 1: "Q1"}, [])
        assert "reserved-id" in [v.code for v in validate_graph(analysis)]

    def test_empty_argument_incoherence(self):
        analysis = make_analysis({1: "Q1"}, [], claim_quote="")
        assert "empty-argument" in [v.code for v in validate_graph(analysis)]

    def test_empty_quote_text_violation(self):
        analysis = make_analysis({1: ""}, [])
        assert "empty-quote-text" in [v.code for v in validate_graph(analysis)]

    def test_cycle_detection_matches_permutation_oracle(self):
        # Random graphs of <= 6 nodes: cycle verdicts must agree with the
        # exhaustive topological-order search, and reported cycle nodes with
        # the self-reachability oracle.
        rng = random.Random(20817)
        for _ in range(300):
            node_count = rng.randint(1, 5)
            ids = list(range(1, node_count + 1))
            quotes = {i: f"Q{i}" for i in ids}
            edges = set()
            for _ in range(rng.randint(0, 6)):
                s, t = rng.sample([0, *ids], 2)
                edges.add((s, t))
            relations = [((s,), t) for s, t in sorted(edges)]
            analysis = make_analysis(quotes, relations)
            violations = validate_graph(analysis)
            cycle_violations = [v for v in violations if v.code == "cycle-detected"]
            edge_list = sorted(edges)
            nodes = sorted({n for e in edge_list for n in e})
            assert bool(cycle_violations) == oracles.has_cycle_by_permutations(nodes, edge_list)
            reported = {n for v in cycle_violations for n in v.subject}
            assert reported == oracles.nodes_on_cycles(edge_list)


def as_plain_tree(node) -> list:
    return [node.quote_id, [[as_plain_tree(child) for child in group] for group in node.groups]]


class TestTraceToAxioms:
    def test_chain(self):
        analysis = make_analysis({1: "Q1", 2: "Q2"}, [((1,), 0), ((2,), 1)])
        tree = trace_to_axioms(analysis, 0)
        assert as_plain_tree(tree) == [0, [[[1, [[[2, [] ]]]]]]]

    def test_leaf_only(self):
        analysis = make_analysis({}, [])
        tree = trace_to_axioms(analysis, 0)
        assert tree.is_axiom
        assert tree.quote_id == 0

    def test_joined_group_preserved_as_unit(self):
        analysis = make_analysis(
            {2: "Q2", 3: "Q3", 4: "Q4"}, [((2, 3), 0), ((4,), 2)]
        )
        tree = trace_to_axioms(analysis, 0)
        relations = [(rel.sources, rel.target) for rel in analysis.relations]
        assert as_plain_tree(tree) == oracles.expand_support_tree(relations, 0)
        # the joined pair stays one group with two members
        assert len(tree.groups) == 1
        assert [child.quote_id for child in tree.groups[0]] == [2, 3]

    def test_unknown_id(self):
        analysis = make_analysis({1: "Q1"}, [])
        with pytest.raises(UnknownIdError):
            trace_to_axioms(analysis, 9)

    def test_random_dags_match_exhaustive_expansion(self):
        rng = random.Random(4242)
        for _ in range(200):
            node_count = rng.randint(0, 5)
            ids = list(range(1, node_count + 1))
            quotes = {i: f"Q{i}" for i in ids}
            all_ids = [0, *ids]
            relations = []
            seen = set()
            for _ in range(rng.randint(0, 6)):
                target = rng.choice(all_ids)
                higher = [i for i in ids if i > target]
                if not higher:
                    continue
                size = rng.randint(1, min(2, len(higher)))
                sources = tuple(sorted(rng.sample(higher, size)))
                if (sources, target) in seen:
                    continue
                seen.add((sources, target))
                relations.append((sources, target))
            analysis = make_analysis(quotes, relations)
            tree = trace_to_axioms(analysis, 0)
            assert as_plain_tree(tree) == oracles.expand_support_tree(relations, 0)
            node_total = tree.count_nodes()
            if relations:
                assert node_total <= len(analysis.all_ids()) * len(relations)
            else:
                assert node_total == 1

    def test_cycle_guard(self):
        analysis = make_analysis({1: "Q1", 2: "Q2"}, [((1,), 2), ((2,), 1)])
        with pytest.raises(CycleDetectedError):
            trace_to_axioms(analysis, 1)


# ---------------------------------------------------------------------------
# Round-trip property
# ---------------------------------------------------------------------------

quote_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=30
)


@st.composite
def analyses(draw) -> ArgumentAnalysis:
    quote_count = draw(st.integers(min_value=0, max_value=5))
    ids = list(range(1, quote_count + 1))
    quotes = {i: draw(quote_text) for i in ids}
    relations = []
    seen = set()
    for _ in range(draw(st.integers(min_value=0, max_value=5))):
        target = draw(st.sampled_from([0, *ids])) if ids else 0
        higher = [i for i in ids if i > target]
        if not higher:
            continue
        # edges always point from a higher id to a lower one, so acyclicity
        # holds by construction
        size = draw(st.integers(min_value=1, max_value=min(3, len(higher))))
        sources = tuple(sorted(draw(st.permutations(higher))[:size]))
        if (sources, target) in seen:
            continue
        seen.add((sources, target))
        relations.append(SupportRelation(sources=sources, target=target))
    claim = draw(quote_text) if (quotes or relations) else draw(st.sampled_from(["", "claim"]))
    return ArgumentAnalysis(
        claim_content=draw(st.text(max_size=20)),
        claim_quote=claim,
        quotes=quotes,
        relations=tuple(relations),
    )


@given(analyses())
@settings(max_examples=200, deadline=None)
def test_serialize_parse_round_trip(analysis):
    serialized = analysis_to_json(analysis)
    reparsed = parse_analysis(serialized)
    assert reparsed == analysis
    assert validate_graph(reparsed) == []
    assert analysis_to_json(reparsed) == serialized


@given(analyses())
@settings(max_examples=100, deadline=None)
def test_parse_output_always_validates(analysis):
    reparsed = parse_analysis(analysis_to_dict(analysis))
    assert validate_graph(reparsed) == []


# ---------------------------------------------------------------------------
# Evaluations
# ---------------------------------------------------------------------------


class TestEvaluation:
    def test_valid_requires_none_labels(self):
        evaluation = Evaluation(
            claim="c",
            evidence=("e",),
            rationale="step by step",
            strength="valid",
            rationale_short="s",
            requirements="r",
            label="None",
            label_long="none",
        )
        assert evaluation.label == "none"

    @pytest.mark.parametrize(
        "strength,label,label_long",
        [
            ("valid", "straw man", "none"),
            ("valid", "none", "misrepresenting the argument"),
            ("invalid", "none", "none"),
            ("invalid", "straw man", "none"),
        ],
    )
    def test_incoherent_verdicts_rejected(self, strength, label, label_long):
        with pytest.raises(EvaluationCoherenceError):
            Evaluation(
                claim="c",
                evidence=("e",),
                rationale="reasoning",
                strength=strength,
                rationale_short="s",
                requirements="r",
                label=label,
                label_long=label_long,
            )

    def test_empty_rationale_rejected(self):
        with pytest.raises(EvaluationCoherenceError):
            Evaluation(
                claim="c",
                evidence=("e",),
                rationale="  ",
                strength="valid",
                rationale_short="s",
                requirements="r",
                label="none",
                label_long="none",
            )

    def test_from_payload_normalizes_string_evidence(self):
        payload = {
            "claim": "c",
            "evidence": "one premise",
            "evaluation": {
                "rationale": "thinking",
                "strength": "invalid",
                "rationale_short": "s",
                "requirements": "r",
                "label": "non sequitur",
                "label_long": "the conclusion does not follow",
            },
        }
        evaluation = Evaluation.from_payload(payload)
        assert evaluation.evidence == ("one premise",)

    def test_from_payload_missing_field(self):
        with pytest.raises(SchemaViolationError):
            Evaluation.from_payload({"claim": "c", "evidence": []})


class TestEvaluatedAnalysis:
    def make_valid_evaluation(self) -> Evaluation:
        return Evaluation(
            claim="c",
            evidence=("e",),
            rationale="ok",
            strength="valid",
            rationale_short="s",
            requirements="r",
            label="none",
            label_long="none",
        )

    def test_exactly_one_per_relation(self):
        analysis = parse_analysis(INDEPENDENT_DOC)
        evaluated = EvaluatedAnalysis(
            analysis=analysis, evaluations={0: self.make_valid_evaluation()}
        )
        assert len(evaluated.evaluations) == len(analysis.relations)

    def test_partial_coverage_requires_failed_indices(self):
        analysis = make_analysis({1: "Q1", 2: "Q2"}, [((1,), 0), ((2,), 0)])
        evaluated = EvaluatedAnalysis(
            analysis=analysis,
            evaluations={0: self.make_valid_evaluation()},
            failed=(1,),
        )
        assert len(evaluated.evaluations) + len(evaluated.failed) == len(analysis.relations)

    def test_uncovered_relation_rejected(self):
        analysis = make_analysis({1: "Q1", 2: "Q2"}, [((1,), 0), ((2,), 0)])
        with pytest.raises(SchemaViolationError):
            EvaluatedAnalysis(analysis=analysis, evaluations={0: self.make_valid_evaluation()})

    def test_overlapping_failed_rejected(self):
        analysis = parse_analysis(INDEPENDENT_DOC)
        with pytest.raises(SchemaViolationError):
            EvaluatedAnalysis(
                analysis=analysis,
                evaluations={0: self.make_valid_evaluation()},
                failed=(0,),
            )
