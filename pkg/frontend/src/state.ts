// View state machine. The reflect modality is fixed at analyze time and the
// two reflect modes are mutually exclusive; write and analyzing modes carry
// zero decorations by construction.

import type { AnchoredSpan, AnalysisRecord, CommentDoc, PipelineResultDoc, Progress, SessionStateDoc } from './types.js';
import { Decoration, socraticDecorations, visualDecorations } from './decorations.js';

export type Mode = 'write' | 'analyzing' | 'visual-reflect' | 'socratic-reflect';

export class ViewState {
  mode: Mode = 'write';
  essay = '';
  analysis: PipelineResultDoc | null = null;
  session: SessionStateDoc | null = null;
  progress: Progress = { resolved: 0, total: 0 };
  focus: AnchoredSpan | null = null;
  comments: CommentDoc[] = [];
  selectedQuoteId: number | null = null;
  lastError: string | null = null;

  startAnalyzing(): void {
    if (this.mode === 'analyzing') return;
    this.mode = 'analyzing';
    this.lastError = null;
  }

  analysisFailed(reason: string): void {
    this.mode = 'write';
    this.lastError = reason;
  }

  analysisDone(record: AnalysisRecord): void {
    if (record.status !== 'done' || !record.result) {
      this.analysisFailed(record.error ? `${record.error.stage}: ${record.error.reason}` : 'analysis failed');
      return;
    }
    this.analysis = record.result;
    this.essay = record.result.essay;
    if (record.result.empty_argument) {
      // nothing to decorate or discuss; back to writing with a banner
      this.mode = 'write';
      this.lastError = 'no argumentation found in the essay';
      return;
    }
    this.mode = record.mode === 'socratic' ? 'socratic-reflect' : 'visual-reflect';
  }

  sessionStarted(session: SessionStateDoc, progress: Progress): void {
    this.session = session;
    this.progress = progress;
    this.comments = [...session.comments];
    this.focus = latestFocus(session);
  }

  // Progress, focus and comments always come from the server response, never
  // from client-side bookkeeping, so the bar can never drift.
  turnApplied(progress: Progress, focus: AnchoredSpan | null, newComments: CommentDoc[], finished: boolean): void {
    this.progress = progress;
    this.focus = finished ? null : focus;
    this.comments = [...this.comments, ...newComments];
    if (this.session) this.session.finished = finished;
  }

  decorations(): Decoration[] {
    if (this.mode === 'visual-reflect' && this.analysis) {
      return visualDecorations(this.analysis);
    }
    if (this.mode === 'socratic-reflect' && this.analysis) {
      return socraticDecorations(this.focus, this.comments, this.essay.length);
    }
    return [];
  }
}

export function latestFocus(session: SessionStateDoc): AnchoredSpan | null {
  if (session.finished) return null;
  const active = Object.entries(session.step_states).find(([, state]) => state === 'active');
  if (!active) return null;
  const activeStep = Number(active[0]);
  for (let i = session.transcript.length - 1; i >= 0; i -= 1) {
    const turn = session.transcript[i];
    if (turn.role === 'assistant' && turn.step_number === activeStep && turn.span) {
      return turn.span;
    }
  }
  const step = session.plan.steps.find((s) => s.step_number === activeStep);
  return step ? step.anchor : null;
}
