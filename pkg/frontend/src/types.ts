// Payload shapes mirroring the backend's published JSON Schemas
// (schemas/*.schema.json). The browser never re-derives spans: all offsets
// are Unicode code-point offsets computed server-side.

export interface AnchoredSpan {
  quote_id: number;
  start: number;
  end: number;
  match_kind: 'exact' | 'fuzzy';
  similarity: number;
}

export type RelationEntry = [number | number[], number];

export interface AnalysisDoc {
  claim: {
    content: string;
    claim_quote: string;
    support_relations: {
      quotes: Record<string, string>;
      relations: RelationEntry[];
    };
  };
}

export interface EvaluationDoc {
  claim: string;
  evidence: string[];
  evaluation: {
    rationale: string;
    strength: 'valid' | 'invalid';
    rationale_short: string;
    requirements: string;
    label: string;
    label_long: string;
  };
}

export interface PlanStepDoc {
  step_number: number;
  description: string;
  target_text: string;
  issue: string;
  relation_index: number;
  anchor: AnchoredSpan;
}

export interface PipelineResultDoc {
  essay: string;
  analysis: AnalysisDoc;
  anchors: Record<string, AnchoredSpan>;
  evaluated: {
    analysis: AnalysisDoc;
    evaluations: Record<string, EvaluationDoc>;
    failed: number[];
  };
  plan: { steps: PlanStepDoc[] };
  warnings: string[];
  empty_argument: boolean;
  timings?: Record<string, number>;
}

export type AnalysisStatus = 'queued' | 'running' | 'done' | 'failed';

export interface AnalysisRecord {
  analysis_id: string;
  essay_id: string;
  mode: 'visual' | 'socratic';
  status: AnalysisStatus;
  result: PipelineResultDoc | null;
  error: { stage: string; reason: string } | null;
  empty_argument?: boolean;
}

export interface TurnDoc {
  role: 'user' | 'assistant';
  text: string;
  span: AnchoredSpan | null;
  suggestion: SuggestionDoc | null;
  step_number: number | null;
}

export interface SuggestionDoc {
  claim_quote?: { original: string; suggestion: string };
  support_relations?: Array<{ original: string; suggestion: string }>;
}

export interface CommentDoc {
  anchored: AnchoredSpan;
  intention: string;
  user_text: string;
  step_number: number;
  created_at: number;
}

export interface SessionStateDoc {
  session_id: string;
  essay_id: string;
  analysis_id: string;
  plan: { steps: PlanStepDoc[] };
  step_states: Record<string, 'pending' | 'active' | 'resolved' | 'skipped'>;
  transcript: TurnDoc[];
  comments: CommentDoc[];
  finished: boolean;
}

export interface Progress {
  resolved: number;
  total: number;
}

export interface AssistantTurnDoc {
  message_to_user: string;
  sentence_to_user: string;
  span: AnchoredSpan | null;
  suggestion: SuggestionDoc | null;
  step_resolved: boolean;
  intention_summary: string | null;
  step_number: number | null;
}

export interface MessageResponse {
  turn: AssistantTurnDoc;
  progress: Progress;
  new_comments: CommentDoc[];
  finished: boolean;
  focus: AnchoredSpan | null;
}

export interface SessionCreated {
  session: SessionStateDoc;
  progress: Progress;
  degraded?: string;
}
