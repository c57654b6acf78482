// In-memory stub of the backend HTTP contract, driven through the same
// FetchLike interface the real client uses. Dialogue behavior is scripted:
// the Nth user message follows the `script` array (clarify or resolve).

import type {
  AnalysisRecord,
  AnchoredSpan,
  CommentDoc,
  MessageResponse,
  PipelineResultDoc,
  PlanStepDoc,
  SessionStateDoc,
  TurnDoc,
} from '../src/types.js';

const CLAIM = 'Schools should require uniforms.';
const QUOTES: Record<string, string> = {
  '1': 'Uniforms erase visible income gaps.',
  '2': 'Morning routines become faster for families.',
  '3': 'Dress codes always improve grades.',
  '4': 'Teachers report calmer classrooms.',
};
export const ESSAY = `${CLAIM} ${QUOTES['1']} ${QUOTES['2']} ${QUOTES['3']} ${QUOTES['4']}`;

function spanOf(quoteId: number, text: string): AnchoredSpan {
  const start = ESSAY.indexOf(text);
  if (start < 0) throw new Error(`fixture text not in essay: ${text}`);
  return { quote_id: quoteId, start, end: start + text.length, match_kind: 'exact', similarity: 1.0 };
}

function evaluation(claim: string, evidence: string, strength: 'valid' | 'invalid') {
  return {
    claim,
    evidence: [evidence],
    evaluation: {
      rationale: 'step by step',
      strength,
      rationale_short: strength === 'valid' ? 'holds up' : 'the evidence does not carry the conclusion',
      requirements: strength === 'valid' ? 'nothing' : 'spell out the missing link',
      label: strength === 'valid' ? 'none' : 'non sequitur',
      label_long: strength === 'valid' ? 'none' : 'the conclusion does not follow',
    },
  };
}

export function fixtureResult(): PipelineResultDoc {
  const analysis = {
    claim: {
      content: 'Require school uniforms',
      claim_quote: CLAIM,
      support_relations: {
        quotes: QUOTES,
        relations: [
          [1, 0],
          [2, 0],
          [3, 0],
          [4, 0],
        ] as Array<[number | number[], number]>,
      },
    },
  };
  const anchors: Record<string, AnchoredSpan> = { '0': spanOf(0, CLAIM) };
  for (const [id, text] of Object.entries(QUOTES)) anchors[id] = spanOf(Number(id), text);
  const steps: PlanStepDoc[] = [
    {
      step_number: 1,
      description: 'Tie morning routines to the requirement question',
      target_text: QUOTES['2'],
      issue: 'convenience does not justify a mandate',
      relation_index: 1,
      anchor: anchors['2'],
    },
    {
      step_number: 2,
      description: 'Soften the absolute grades claim',
      target_text: QUOTES['3'],
      issue: 'states an exceptionless rule',
      relation_index: 2,
      anchor: anchors['3'],
    },
  ];
  return {
    essay: ESSAY,
    analysis,
    anchors,
    evaluated: {
      analysis,
      evaluations: {
        '0': evaluation(CLAIM, QUOTES['1'], 'valid'),
        '1': evaluation(CLAIM, QUOTES['2'], 'invalid'),
        '2': evaluation(CLAIM, QUOTES['3'], 'invalid'),
        '3': evaluation(CLAIM, QUOTES['4'], 'valid'),
      },
      failed: [],
    },
    plan: { steps },
    warnings: [],
    empty_argument: false,
  };
}

export function emptyArgumentResult(): PipelineResultDoc {
  const analysis = {
    claim: { content: '', claim_quote: '', support_relations: { quotes: {}, relations: [] } },
  };
  return {
    essay: 'Milk, eggs, bread.',
    analysis,
    anchors: {},
    evaluated: { analysis, evaluations: {}, failed: [] },
    plan: { steps: [] },
    warnings: [],
    empty_argument: true,
  };
}

export type ScriptAction = 'clarify' | 'resolve';

interface StubOptions {
  pollsUntilDone?: number;
  script?: ScriptAction[];
  oneShot429?: boolean;
  messageDelayMs?: number;
  result?: PipelineResultDoc;
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export class StubServer {
  analyzeCalls = 0;
  messageAttempts = 0;
  private essays = new Map<string, string>();
  private analyses = new Map<string, AnalysisRecord & { pollsLeft: number }>();
  private sessions = new Map<string, SessionStateDoc>();
  private messageCounts = new Map<string, number>();
  private nextId = 1;
  private pending429: boolean;

  constructor(private options: StubOptions = {}) {
    this.pending429 = options.oneShot429 ?? false;
  }

  private id(prefix: string): string {
    return `${prefix}${this.nextId++}`;
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? 'GET';
    const body = init?.body ? (JSON.parse(String(init.body)) as Record<string, unknown>) : {};
    const path = url.replace(/^https?:\/\/[^/]+/, '');

    let match: RegExpMatchArray | null;
    if (method === 'POST' && path === '/essays') {
      const text = String(body.text ?? '');
      if (!text.trim()) return json({ detail: 'essay text must be non-empty' }, 400);
      const essayId = this.id('e');
      this.essays.set(essayId, text);
      return json({ essay_id: essayId }, 201);
    }
    if (method === 'POST' && (match = path.match(/^\/essays\/([^/]+)\/analyze$/))) {
      if (!this.essays.has(match[1])) return json({ detail: 'unknown essay' }, 404);
      this.analyzeCalls += 1;
      const analysisId = this.id('a');
      this.analyses.set(analysisId, {
        analysis_id: analysisId,
        essay_id: match[1],
        mode: body.mode as 'visual' | 'socratic',
        status: 'queued',
        result: null,
        error: null,
        pollsLeft: this.options.pollsUntilDone ?? 2,
      });
      return json({ analysis_id: analysisId, status: 'queued' }, 202);
    }
    if (method === 'GET' && (match = path.match(/^\/analyses\/([^/]+)$/))) {
      const record = this.analyses.get(match[1]);
      if (!record) return json({ detail: 'unknown analysis' }, 404);
      if (record.pollsLeft > 0) {
        record.pollsLeft -= 1;
        record.status = record.pollsLeft === 0 ? 'done' : 'running';
        if (record.status === 'done') {
          record.result = this.options.result ?? fixtureResult();
        }
      }
      const { pollsLeft: _unused, ...payload } = record;
      return json({ ...payload, empty_argument: record.result?.empty_argument });
    }
    if (method === 'POST' && path === '/sessions') {
      const record = this.analyses.get(String(body.analysis_id));
      if (!record) return json({ detail: 'unknown analysis' }, 404);
      if (record.mode !== 'socratic') return json({ detail: 'not a socratic analysis' }, 409);
      if (record.status !== 'done' || !record.result) return json({ detail: 'not done' }, 409);
      const session = this.openSession(record);
      return json({ session, progress: this.progressOf(session) }, 201);
    }
    if (method === 'GET' && (match = path.match(/^\/sessions\/([^/]+)$/))) {
      const session = this.sessions.get(match[1]);
      return session ? json(session) : json({ detail: 'unknown session' }, 404);
    }
    if (method === 'POST' && (match = path.match(/^\/sessions\/([^/]+)\/messages$/))) {
      if (this.pending429) {
        this.pending429 = false;
        this.messageAttempts += 1;
        return json({ detail: 'busy, retry shortly' }, 429);
      }
      const session = this.sessions.get(match[1]);
      if (!session) return json({ detail: 'unknown session' }, 404);
      if (session.finished) return json({ detail: 'finished' }, 409);
      this.messageAttempts += 1;
      if (this.options.messageDelayMs) await sleep(this.options.messageDelayMs);
      return json(this.handleMessage(session, String(body.text ?? '')));
    }
    if (method === 'GET' && (match = path.match(/^\/essays\/([^/]+)\/comments$/))) {
      const comments: CommentDoc[] = [];
      for (const session of this.sessions.values()) {
        if (session.essay_id === match[1]) comments.push(...session.comments);
      }
      return json({ essay_id: match[1], comments });
    }
    return json({ detail: `no stub for ${method} ${path}` }, 404);
  };

  private openSession(record: AnalysisRecord): SessionStateDoc {
    const result = record.result!;
    const sessionId = this.id('s');
    const stepStates: SessionStateDoc['step_states'] = {};
    result.plan.steps.forEach((step, index) => {
      stepStates[String(step.step_number)] = index === 0 ? 'active' : 'pending';
    });
    const transcript: TurnDoc[] = [];
    if (result.plan.steps.length > 0) {
      const first = result.plan.steps[0];
      transcript.push({
        role: 'assistant',
        text: 'What does this sentence establish for you?',
        span: first.anchor,
        suggestion: null,
        step_number: first.step_number,
      });
    }
    const session: SessionStateDoc = {
      session_id: sessionId,
      essay_id: record.essay_id,
      analysis_id: record.analysis_id,
      plan: result.plan,
      step_states: stepStates,
      transcript,
      comments: [],
      finished: result.plan.steps.length === 0,
    };
    this.sessions.set(sessionId, session);
    this.messageCounts.set(sessionId, 0);
    return session;
  }

  private progressOf(session: SessionStateDoc) {
    return {
      resolved: Object.values(session.step_states).filter((s) => s === 'resolved').length,
      total: session.plan.steps.length,
    };
  }

  private activeStep(session: SessionStateDoc): PlanStepDoc {
    const active = Object.entries(session.step_states).find(([, s]) => s === 'active')!;
    return session.plan.steps.find((step) => step.step_number === Number(active[0]))!;
  }

  private handleMessage(session: SessionStateDoc, text: string): MessageResponse {
    const count = this.messageCounts.get(session.session_id) ?? 0;
    this.messageCounts.set(session.session_id, count + 1);
    const script = this.options.script ?? ['clarify', 'resolve', 'resolve'];
    const action: ScriptAction = script[Math.min(count, script.length - 1)];
    const step = this.activeStep(session);

    session.transcript.push({ role: 'user', text, span: null, suggestion: null, step_number: step.step_number });

    if (action === 'clarify') {
      const turn: TurnDoc = {
        role: 'assistant',
        text: 'Say more about how this supports your claim.',
        span: step.anchor,
        suggestion: null,
        step_number: step.step_number,
      };
      session.transcript.push(turn);
      return {
        turn: {
          message_to_user: turn.text,
          sentence_to_user: step.target_text,
          span: step.anchor,
          suggestion: null,
          step_resolved: false,
          intention_summary: null,
          step_number: step.step_number,
        },
        progress: this.progressOf(session),
        new_comments: [],
        finished: false,
        focus: step.anchor,
      };
    }

    // resolve: comment marker, advance or finish
    const comment: CommentDoc = {
      anchored: step.anchor,
      intention: `Rework: ${step.description}`,
      user_text: text,
      step_number: step.step_number,
      created_at: 1000 + session.comments.length,
    };
    session.comments.push(comment);
    session.step_states[String(step.step_number)] = 'resolved';
    session.transcript.push({
      role: 'assistant',
      text: 'Exactly, noting that down.',
      span: step.anchor,
      suggestion: null,
      step_number: step.step_number,
    });

    const pending = Object.entries(session.step_states)
      .filter(([, s]) => s === 'pending')
      .map(([n]) => Number(n))
      .sort((a, b) => a - b);
    if (pending.length > 0) {
      session.step_states[String(pending[0])] = 'active';
      const next = session.plan.steps.find((s) => s.step_number === pending[0])!;
      session.transcript.push({
        role: 'assistant',
        text: 'Next, look at this sentence.',
        span: next.anchor,
        suggestion: null,
        step_number: next.step_number,
      });
      return {
        turn: {
          message_to_user: 'Next, look at this sentence.',
          sentence_to_user: next.target_text,
          span: next.anchor,
          suggestion: null,
          step_resolved: false,
          intention_summary: null,
          step_number: next.step_number,
        },
        progress: this.progressOf(session),
        new_comments: [comment],
        finished: false,
        focus: next.anchor,
      };
    }

    session.finished = true;
    session.transcript.push({
      role: 'assistant',
      text: 'That covers everything, no more feedback to provide.',
      span: null,
      suggestion: null,
      step_number: null,
    });
    return {
      turn: {
        message_to_user: 'That covers everything, no more feedback to provide.',
        sentence_to_user: '',
        span: null,
        suggestion: null,
        step_resolved: false,
        intention_summary: null,
        step_number: null,
      },
      progress: this.progressOf(session),
      new_comments: [comment],
      finished: true,
      focus: null,
    };
  }
}
