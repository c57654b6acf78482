"""Socratic dialogue state machine.

One flaw at a time: exactly one plan step is active until the user verbalizes
the issue, at which point a comment marker is dropped at the step's anchor,
the step resolves, and the next pending step takes focus.  The engine holds
the structural guarantees (single active step, comment-resolution coupling,
verbalization gate); whether the model withholds answers is a prompt-level
contract and is not asserted here.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, replace

from . import prompts
from .anchoring import AnchorError, AnchoredSpan, anchor_quote
from .gateway import GatewayError, LlmGateway
from .graph import evaluated_to_dict
from .pipeline import PipelineConfig, PipelineResult, Plan, PlanStep, essay_key

logger = logging.getLogger(__name__)

PENDING = "pending"
ACTIVE = "active"
RESOLVED = "resolved"
SKIPPED = "skipped"

ROLE_USER = "user"
ROLE_ASSISTANT = "assistant"

MAX_MESSAGE_CHARS = 400

NO_FEEDBACK_MESSAGE = (
    "I have no feedback to provide. I could not find any logical flaws to work "
    "through, so your argumentation stands as written."
)
CLOSING_MESSAGE = (
    "That covers everything we set out to fix. I have no feedback to provide "
    "beyond the notes you just made, nice work."
)


class SessionError(RuntimeError):
    pass


class SessionFinishedError(SessionError):
    """No further messages are accepted once every step is settled."""


@dataclass(frozen=True)
class Turn:
    role: str
    text: str
    span: AnchoredSpan | None = None
    suggestion: dict | None = None
    step_number: int | None = None

    def to_dict(self) -> dict:
        return {
            "role": self.role,
            "text": self.text,
            "span": self.span.to_dict() if self.span else None,
            "suggestion": self.suggestion,
            "step_number": self.step_number,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Turn":
        return cls(
            role=str(data["role"]),
            text=str(data["text"]),
            span=AnchoredSpan.from_dict(data["span"]) if data.get("span") else None,
            suggestion=data.get("suggestion"),
            step_number=data.get("step_number"),
        )


@dataclass(frozen=True)
class CommentMarker:
    """Text-anchored reminder of what the user decided to change."""

    anchored: AnchoredSpan
    intention: str
    user_text: str
    step_number: int
    created_at: float

    def to_dict(self) -> dict:
        return {
            "anchored": self.anchored.to_dict(),
            "intention": self.intention,
            "user_text": self.user_text,
            "step_number": self.step_number,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "CommentMarker":
        return cls(
            anchored=AnchoredSpan.from_dict(data["anchored"]),
            intention=str(data["intention"]),
            user_text=str(data["user_text"]),
            step_number=int(data["step_number"]),
            created_at=float(data["created_at"]),
        )


@dataclass(frozen=True)
class AssistantTurn:
    """One generated dialogue turn, already repaired and anchored."""

    message_to_user: str
    sentence_to_user: str
    span: AnchoredSpan | None
    suggestion: dict | None
    step_resolved: bool
    intention_summary: str | None = None
    step_number: int | None = None

    def to_dict(self) -> dict:
        return {
            "message_to_user": self.message_to_user,
            "sentence_to_user": self.sentence_to_user,
            "span": self.span.to_dict() if self.span else None,
            "suggestion": self.suggestion,
            "step_resolved": self.step_resolved,
            "intention_summary": self.intention_summary,
            "step_number": self.step_number,
        }


@dataclass
class SessionState:
    session_id: str
    essay_id: str
    analysis_id: str
    plan: Plan
    step_states: dict[int, str] = field(default_factory=dict)
    transcript: list[Turn] = field(default_factory=list)
    comments: list[CommentMarker] = field(default_factory=list)
    finished: bool = False

    def active_step_number(self) -> int | None:
        active = [n for n, s in self.step_states.items() if s == ACTIVE]
        if len(active) > 1:
            raise SessionError(f"multiple active steps: {sorted(active)}")
        return active[0] if active else None

    def resolved_count(self) -> int:
        return sum(1 for s in self.step_states.values() if s == RESOLVED)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "essay_id": self.essay_id,
            "analysis_id": self.analysis_id,
            "plan": self.plan.to_dict(),
            "step_states": {str(n): s for n, s in sorted(self.step_states.items())},
            "transcript": [t.to_dict() for t in self.transcript],
            "comments": [c.to_dict() for c in self.comments],
            "finished": self.finished,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SessionState":
        return cls(
            session_id=str(data["session_id"]),
            essay_id=str(data["essay_id"]),
            analysis_id=str(data["analysis_id"]),
            plan=Plan.from_dict(data["plan"]),
            step_states={int(n): str(s) for n, s in data["step_states"].items()},
            transcript=[Turn.from_dict(t) for t in data["transcript"]],
            comments=[CommentMarker.from_dict(c) for c in data["comments"]],
            finished=bool(data["finished"]),
        )


def validate_state(state: SessionState, essay_length: int | None = None) -> list[str]:
    """Structural invariant check; empty list means the state is sound."""
    problems: list[str] = []
    active = [n for n, s in state.step_states.items() if s == ACTIVE]
    if len(active) > 1:
        problems.append(f"more than one active step: {sorted(active)}")
    open_steps = [n for n, s in state.step_states.items() if s in (PENDING, ACTIVE)]
    if state.finished and open_steps:
        problems.append(f"finished with open steps {sorted(open_steps)}")
    if not state.finished and not open_steps and state.plan.steps:
        problems.append("all steps settled but session not finished")
    if len(state.comments) != state.resolved_count():
        problems.append(
            f"comment count {len(state.comments)} != resolved count {state.resolved_count()}"
        )
    for comment in state.comments:
        if state.step_states.get(comment.step_number) != RESOLVED:
            problems.append(f"comment for step {comment.step_number} which is not resolved")
    if essay_length is not None:
        spans = [t.span for t in state.transcript if t.span] + [c.anchored for c in state.comments]
        for span in spans:
            if span.end > essay_length:
                problems.append(f"span [{span.start}, {span.end}) exceeds essay length {essay_length}")
    return problems


ANCHOR_FEEDBACK = (
    '\n\nYour previous "sentenceToUser" was not found in the essay. '
    "Quote a sentence from the essay character by character."
)


class SocraticEngine:
    """Drives one session: generates turns, tracks step progress, and creates
    comment markers on resolution.

    A single session is single-writer; the server serializes messages per
    session.  The engine itself is deterministic given a deterministic
    gateway and clock.
    """

    def __init__(
        self,
        result: PipelineResult,
        gateway: LlmGateway,
        config: PipelineConfig,
        state: SessionState,
        *,
        clock: Callable[[], float] = time.time,
    ):
        self.result = result
        self.gateway = gateway
        self.config = config
        self.state = state
        self.clock = clock
        self.opening_error: str | None = None
        self._essay_key = essay_key(result.essay)
        self._evaluated_dict = evaluated_to_dict(result.evaluated)

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def start_session(
        cls,
        result: PipelineResult,
        gateway: LlmGateway,
        config: PipelineConfig,
        *,
        session_id: str,
        essay_id: str = "",
        analysis_id: str = "",
        clock: Callable[[], float] = time.time,
    ) -> "SocraticEngine":
        """Open a session: step 1 becomes active and gets an opening turn, or
        the session starts finished when the plan is empty.

        A gateway failure during the opening turn leaves a usable session
        (``opening_error`` set); the next message retries generation.
        """
        steps = result.plan.steps
        state = SessionState(
            session_id=session_id,
            essay_id=essay_id,
            analysis_id=analysis_id,
            plan=result.plan,
            step_states={s.step_number: PENDING for s in steps},
        )
        engine = cls(result, gateway, config, state, clock=clock)
        if not steps:
            state.finished = True
            state.transcript.append(Turn(role=ROLE_ASSISTANT, text=NO_FEEDBACK_MESSAGE))
            return engine
        state.step_states[steps[0].step_number] = ACTIVE
        try:
            engine._emit_generated_turn(honor_resolution=False)
        except GatewayError as exc:
            engine.opening_error = str(exc)
            logger.warning("session %s degraded: opening turn failed: %s", session_id, exc)
        return engine

    @classmethod
    def resume(
        cls,
        state: SessionState | Mapping,
        result: PipelineResult,
        gateway: LlmGateway,
        config: PipelineConfig,
        *,
        clock: Callable[[], float] = time.time,
    ) -> "SocraticEngine":
        if isinstance(state, Mapping):
            state = SessionState.from_dict(state)
        return cls(result, gateway, config, state, clock=clock)

    # -- observations -------------------------------------------------------

    def progress(self) -> tuple[int, int]:
        return self.state.resolved_count(), len(self.state.plan.steps)

    def current_focus(self) -> AnchoredSpan | None:
        """The active step's most recent highlighted span, if any."""
        active = self.state.active_step_number()
        if active is None:
            return None
        for turn in reversed(self.state.transcript):
            if turn.role == ROLE_ASSISTANT and turn.step_number == active and turn.span:
                return turn.span
        return self._step(active).anchor

    # -- transitions --------------------------------------------------------

    def user_message(self, text: str) -> AssistantTurn:
        """Process one user message; returns the newest assistant turn.

        On resolution the comment marker is created from the step's anchor
        and the user's verbalized intention, the next pending step activates
        with a fresh focusing turn, and the last resolution finishes the
        session with a closing turn.
        """
        if self.state.finished:
            raise SessionFinishedError("session is finished")
        active = self.state.active_step_number()
        if active is None:
            raise SessionError("no active step")
        self.state.transcript.append(Turn(role=ROLE_USER, text=text, step_number=active))
        if self.opening_error is not None:
            self.opening_error = None
        turn = self._emit_generated_turn(honor_resolution=True)
        if not turn.step_resolved:
            return turn
        step = self._step(active)
        self.state.comments.append(
            CommentMarker(
                anchored=step.anchor,
                intention=turn.intention_summary or text,
                user_text=text,
                step_number=active,
                created_at=self.clock(),
            )
        )
        self.state.step_states[active] = RESOLVED
        return self._advance()

    def skip_step(self) -> AssistantTurn:
        """Skip the active step without a comment; counts toward total only."""
        if self.state.finished:
            raise SessionFinishedError("session is finished")
        active = self.state.active_step_number()
        if active is None:
            raise SessionError("no active step")
        self.state.step_states[active] = SKIPPED
        return self._advance()

    def _advance(self) -> AssistantTurn:
        pending = sorted(n for n, s in self.state.step_states.items() if s == PENDING)
        if pending:
            self.state.step_states[pending[0]] = ACTIVE
            return self._emit_generated_turn(honor_resolution=False)
        self.state.finished = True
        closing = AssistantTurn(
            message_to_user=CLOSING_MESSAGE,
            sentence_to_user="",
            span=None,
            suggestion=None,
            step_resolved=False,
        )
        self.state.transcript.append(Turn(role=ROLE_ASSISTANT, text=CLOSING_MESSAGE))
        return closing

    # -- turn generation ----------------------------------------------------

    def _step(self, number: int) -> PlanStep:
        for step in self.state.plan.steps:
            if step.step_number == number:
                return step
        raise SessionError(f"unknown step {number}")

    def _emit_generated_turn(self, *, honor_resolution: bool) -> AssistantTurn:
        """Generate a turn for the active step and append it to the transcript.

        Opening and focusing turns never resolve a step: resolution requires
        a user turn, so ``stepResolved`` is only honored on replies.
        """
        active = self.state.active_step_number()
        step = self._step(active)
        turn = self._generate(step)
        if not honor_resolution and turn.step_resolved:
            turn = replace(turn, step_resolved=False, intention_summary=None)
        self.state.transcript.append(
            Turn(
                role=ROLE_ASSISTANT,
                text=turn.message_to_user,
                span=turn.span,
                suggestion=turn.suggestion,
                step_number=active,
            )
        )
        return turn

    def _generate(self, step: PlanStep) -> AssistantTurn:
        prompt = self._render_prompt(step)
        fixture_key = f"socratic-{self._essay_key}-t{self._assistant_turn_count()}"
        model = self.config.stage_model(prompts.PROMPT_SOCRATIC)
        record = self.gateway.complete_json(
            prompt,
            prompts.SOCRATIC_SCHEMA,
            model,
            prompt_id=prompts.PROMPT_SOCRATIC,
            fixture_key=fixture_key,
        )
        payload = record.parsed
        sentence = str(payload.get("sentenceToUser", ""))
        span = self._anchor_sentence(sentence)
        if span is None:
            record = self.gateway.complete_json(
                prompt + ANCHOR_FEEDBACK,
                prompts.SOCRATIC_SCHEMA,
                model,
                prompt_id=prompts.PROMPT_SOCRATIC,
                fixture_key=f"{fixture_key}-retry",
            )
            payload = record.parsed
            sentence = str(payload.get("sentenceToUser", ""))
            span = self._anchor_sentence(sentence)
            if span is None:
                logger.warning(
                    "session %s: sentenceToUser did not anchor twice, falling back to the step anchor",
                    self.state.session_id,
                )
                sentence = step.target_text
                span = step.anchor

        message = str(payload["messageToUser"])
        if len(message) > MAX_MESSAGE_CHARS:
            logger.warning(
                "session %s: assistant message of %d chars truncated to %d",
                self.state.session_id,
                len(message),
                MAX_MESSAGE_CHARS,
            )
            message = message[:MAX_MESSAGE_CHARS]
        intention = payload.get("intentionSummary")
        return AssistantTurn(
            message_to_user=message,
            sentence_to_user=sentence,
            span=span,
            suggestion=payload.get("suggestion"),
            step_resolved=bool(payload.get("stepResolved", False)),
            intention_summary=str(intention) if intention else None,
            step_number=step.step_number,
        )

    def _anchor_sentence(self, sentence: str) -> AnchoredSpan | None:
        if not sentence.strip():
            return None
        try:
            return anchor_quote(self.result.essay, sentence, self.config.anchor_threshold)
        except (AnchorError, ValueError):
            return None

    def _render_prompt(self, step: PlanStep) -> str:
        transcript = [
            (turn.role, turn.text)
            for turn in self.state.transcript
        ]
        return prompts.render_socratic_prompt(
            self._evaluated_dict,
            step_number=step.step_number,
            total_steps=len(self.state.plan.steps),
            step_description=step.description,
            step_target=step.target_text,
            step_issue=step.issue,
            transcript=transcript,
        )

    def _assistant_turn_count(self) -> int:
        return sum(1 for t in self.state.transcript if t.role == ROLE_ASSISTANT)
