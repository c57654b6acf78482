"""Prompt templates and the JSON schemas their replies must satisfy.

Four templates drive the pipeline: structure extraction, per-relation
validity checking, revision-plan generation, and the Socratic dialogue turn.
The dialogue template extends the base instructions with an orchestration
contract (the ``stepResolved`` flag and its ``intentionSummary`` companion)
so the state machine can detect when the user has verbalized the flaw; the
extension is confined to the clearly marked block below.
"""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence

PROMPT_STRUCTURE = "structure"
PROMPT_VALIDITY = "validity"
PROMPT_PLAN = "plan"
PROMPT_SOCRATIC = "socratic"

ESSAY_PLACEHOLDER = "{{ESSAY_CONTENT}}"

STRUCTURE_PROMPT = """Analyze the argumentation structure of the following essay and output
it in JSON format.

First identify and quote the main claim of the essay. This should be
the author's core position.

Analysis:
1. Extract every distinct argumentative statement (reasons, premises,
   evidence) as separate atomic quotes
2. Map which reasons support which claims
3. Distinguish direct support (statements that directly support the
   main claim) from indirect support (statements that support other
   supporting statements)
4. Identify joined reasons (work ONLY together) vs independent reasons
5. Continue tracing support chains until reaching axioms (unsupported
   base claims)

JSON Format:
{
  claim: {
    "content": "author's core position in your words",
    "claim_quote": "exact quote of the main thesis",
    "support_relations": {
      "quotes": {
        "1": "exact quote atomic reason in this case for claim_quote",
        "2": "exact quote atomic reason 2",
        ...
      },
      "relations": [
        # [key of quote(s) supporting claim/premise/evidence,
           target claim/premise/evidence] where target is what gets
           supported
        ...
      ]
    }
  }
}

KEY RULES:
- The authors main position should be clear from reading the main claim
- 0 always refers to claim_quote (the main thesis only - NOT sub-claims
  or premises)
- Quote character by character, preserving all errors, typos,
  punctuation, case distinction, formatting and similar. Verify that
  the quotes are exact.
- Ensure that independent and joint reasons are added correctly in
  the json.
- Independent reasons (1->0; 2->0) are single arrays [1, 0], where
  each reason only offers support for the conclusion without needing
  any other premise.
- Joined reasons (2&3 -> 0) are arrays like [[2,3], 0], where reasons
  (here 2 and 3) only work when both are present, i.e. one alone
  provides insufficient support for the conclusion.
- Every quote must be atomic (one distinct claim)
- Claims & reasons can be shorter than a sentence
- Is there no argumentation set main claim to "" and keep quotes and
  relations empty

ESSAY:
{{ESSAY_CONTENT}}"""

VALIDITY_PROMPT = """What is used to support this sentence "[content]".

Return your answer in the following json format:
{
    "claim":"[content]",
    "evidence":[evidence] # the premise that is used to support the claim.
    This could be citations and/or another claim in the text.
    "evaluation":{
            "rationale":"Think through logical validity step by step
            assuming that the evidence is true. Finally, report validity
            strictly", # if references/citations are made to evidence
            outside the text, assume that the reference/citation is true.
            "strength":"logic validity", # options ["valid", "invalid"]
            "rationale_short":"The main error to be communicated to the
            user example: 'The evidence does not directly address... '"
            # in simple understandable language
            "requirements": "What is necessary for the evidence to be
            logically valid." # in short, simple and actionable language
            "label":"simple one-two words describing the logical flaw
            (if any)" # if the argument is logically valid return "none".
            "label_long":"short definition of the label describing the
            logical flaw (if any)" # if the argument is logically
            valid return "none".
    }
}"""

PLAN_PROMPT = """Based on the argument analysis provided, create a step-by-step plan to fix all logical flaws in the text.
Each step should address one specific issue identified in the evaluation.

Focus on evaluations where strength is "invalid" and create actionable steps.
Order the steps from most critical to least critical issues.

Return your response in JSON format:
{
  "steps": [
    {
      "stepNumber": 1,
      "description": "Brief description of what needs to be fixed",
      "targetText": "The exact quote that has the issue",
      "issue": "What's wrong with it (from the evaluation)"
    }
  ]
}

If there are no flaws to fix, return an empty steps array.

Argument analysis:"""

SOCRATIC_PROMPT = """You are a reasoning assistant that helps people reasoning through logical flaws in their essays using the socratic method.
You are provided with an argument analysis with support relations between claims and evidence as.
The argument analysis also includes evaluations of the logical validity of relations between claims and evidence.

You guide the user using socratic questioning to help them realize their reasoning errors (logically invalid reasoning) and learn how to fix their errors.
The socratic method involves subtly directing the users intention towards a flaw in their reasoning without explicitly pointing out that it is a flaw.
You do this through multiple messages. Slowly direction more in each message.
Instead, interestedly inquires about the flaw asking what the user meant to say. And then ask questions to make them realize the flaw themselves.
After the user have realized the mistake you through questions help them correct the error in their text. Ask them if you should provide a suggestion for improvement.

Once the error is corrected, you move on to the next flaw. If there are none, you say that you have no feedback to provide & end the conversation.

You engage with the user conversationally as a dialogue.

**Output Format:**
Your response must be in the exact JSON format with the following structure:

{
  "messageToUser": Your conversational message to the user,
  "sentenceToUser": Exact quote of the sentence you want the user to think about,
  (optional) "suggestion": {
    "claim_quote": {"original": "exact quote of the main thesis", "suggestion": "suggestion for the main thesis"},
    "support_relations": [{"original": "exact quote atomic reason in this case for claim_quote", "suggestion": "suggestion for the atomic reason"}]
  },
  "stepResolved": true or false,
  (optional) "intentionSummary": One short sentence restating what the user wants to change

KEY RULES:
- Focus on the main claim and support relations where strength is not "logically valid" and respect the "requirements" mentioned for improvement
- Answer in maximum 400 characters
- Set stepResolved to true ONLY when the user has articulated the current flaw themselves or described an adequate fix for it; otherwise set it to false
- When stepResolved is true, restate the user's intended change in one short sentence in intentionSummary

Argument analysis results:"""

# Orchestration extension to the base dialogue instructions: everything
# involving stepResolved / intentionSummary above exists so the session
# engine can detect verbalization; the base instructions end the output
# format after "suggestion".
SOCRATIC_EXTENSION_FIELDS = ("stepResolved", "intentionSummary")


STRUCTURE_SCHEMA: dict = {
    "type": "object",
    "required": ["claim"],
    "properties": {
        "claim": {
            "type": "object",
            "required": ["content", "claim_quote", "support_relations"],
            "properties": {
                "content": {"type": "string"},
                "claim_quote": {"type": "string"},
                "support_relations": {
                    "type": "object",
                    "required": ["quotes", "relations"],
                    "properties": {
                        "quotes": {
                            "type": "object",
                            "additionalProperties": {"type": "string"},
                        },
                        "relations": {
                            "type": "array",
                            "items": {"type": "array", "minItems": 2, "maxItems": 2},
                        },
                    },
                },
            },
        }
    },
}

VALIDITY_SCHEMA: dict = {
    "type": "object",
    "required": ["claim", "evidence", "evaluation"],
    "properties": {
        "claim": {"type": "string"},
        "evidence": {
            "anyOf": [
                {"type": "string"},
                {"type": "array", "items": {"type": "string"}},
            ]
        },
        "evaluation": {
            "type": "object",
            "required": [
                "rationale",
                "strength",
                "rationale_short",
                "requirements",
                "label",
                "label_long",
            ],
            "properties": {
                "rationale": {"type": "string", "minLength": 1},
                "strength": {"enum": ["valid", "invalid"]},
                "rationale_short": {"type": "string"},
                "requirements": {"type": "string"},
                "label": {"type": "string"},
                "label_long": {"type": "string"},
            },
        },
    },
}

PLAN_SCHEMA: dict = {
    "type": "object",
    "required": ["steps"],
    "properties": {
        "steps": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["stepNumber", "description", "targetText", "issue"],
                "properties": {
                    "stepNumber": {"type": "integer"},
                    "description": {"type": "string"},
                    "targetText": {"type": "string"},
                    "issue": {"type": "string"},
                },
            },
        }
    },
}

SOCRATIC_SCHEMA: dict = {
    "type": "object",
    "required": ["messageToUser", "sentenceToUser", "stepResolved"],
    "properties": {
        "messageToUser": {"type": "string"},
        "sentenceToUser": {"type": "string"},
        "stepResolved": {"type": "boolean"},
        "intentionSummary": {"type": "string"},
        "suggestion": {
            "type": "object",
            "properties": {
                "claim_quote": {
                    "type": "object",
                    "required": ["original", "suggestion"],
                    "properties": {
                        "original": {"type": "string"},
                        "suggestion": {"type": "string"},
                    },
                },
                "support_relations": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["original", "suggestion"],
                        "properties": {
                            "original": {"type": "string"},
                            "suggestion": {"type": "string"},
                        },
                    },
                },
            },
        },
    },
}

SCHEMAS_BY_PROMPT = {
    PROMPT_STRUCTURE: STRUCTURE_SCHEMA,
    PROMPT_VALIDITY: VALIDITY_SCHEMA,
    PROMPT_PLAN: PLAN_SCHEMA,
    PROMPT_SOCRATIC: SOCRATIC_SCHEMA,
}


def render_structure_prompt(essay: str) -> str:
    return STRUCTURE_PROMPT.replace(ESSAY_PLACEHOLDER, essay)


def render_validity_prompt(target_text: str, evidence_texts: Sequence[str], essay: str) -> str:
    """Fill both "[content]" slots with the relation's target text and append
    the relation's evidence plus the full essay."""
    filled = VALIDITY_PROMPT.replace("[content]", target_text)
    evidence_block = json.dumps(list(evidence_texts), ensure_ascii=False, indent=2)
    return (
        f"{filled}\n\n"
        f"Evidence under evaluation (from the argument analysis):\n{evidence_block}\n\n"
        f"Original Essay:\n{essay}"
    )


def render_plan_prompt(evaluated: Mapping) -> str:
    return f"{PLAN_PROMPT}\n{json.dumps(evaluated, ensure_ascii=False, indent=2)}"


def render_socratic_prompt(
    evaluated: Mapping,
    *,
    step_number: int,
    total_steps: int,
    step_description: str,
    step_target: str,
    step_issue: str,
    transcript: Sequence[tuple[str, str]],
    user_message: str | None = None,
) -> str:
    """Compose one dialogue-turn prompt: instructions, analysis, the active
    plan step, and the conversation so far."""
    parts = [
        SOCRATIC_PROMPT,
        json.dumps(evaluated, ensure_ascii=False, indent=2),
        "",
        f"Current focus (step {step_number} of {total_steps}): {step_description}",
        f"Target text: {step_target}",
        f"Issue: {step_issue}",
        "",
        "Conversation so far:",
    ]
    if transcript:
        parts.extend(f"{role}: {text}" for role, text in transcript)
    else:
        parts.append("(none yet - open the conversation)")
    if user_message is not None:
        parts.append(f"user: {user_message}")
    parts.append("")
    parts.append("Reply with the JSON format above.")
    return "\n".join(parts)
