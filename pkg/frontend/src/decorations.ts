// Pure decoration computation. Write mode means an empty set by contract:
// nothing in here runs until an analysis has completed.

import type { AnchoredSpan, CommentDoc, PipelineResultDoc, RelationEntry } from './types.js';

export type DecorationStyle = 'main-claim' | 'support' | 'redline' | 'focus' | 'comment-anchor';

export interface Decoration {
  key: string;
  start: number;
  end: number;
  style: DecorationStyle;
  tooltip?: string;
}

export function relationSources(entry: RelationEntry): number[] {
  const [sources] = entry;
  return Array.isArray(sources) ? sources : [sources];
}

export function relationTarget(entry: RelationEntry): number {
  return entry[1];
}

function clampTo(span: AnchoredSpan, essayLength: number): AnchoredSpan | null {
  if (span.start < 0 || span.end > essayLength || span.start >= span.end) return null;
  return span;
}

// Visual reflect mode: the main claim is highlighted, every other anchored
// quote gets a quiet support style, and each invalid relation contributes
// exactly one redline, placed on its (first) source span: that is the
// evidence whose support fails. Tooltips carry the flaw label, the short
// rationale, and the actionable requirements.
export function visualDecorations(result: PipelineResultDoc): Decoration[] {
  const essayLength = result.essay.length;
  const decorations: Decoration[] = [];
  const redlined = new Set<number>();

  const relations = result.analysis.claim.support_relations.relations;
  for (const [indexText, evaluation] of Object.entries(result.evaluated.evaluations)) {
    if (evaluation.evaluation.strength !== 'invalid') continue;
    const index = Number(indexText);
    const entry = relations[index];
    if (!entry) continue;
    const sources = relationSources(entry);
    const anchor = result.anchors[String(sources[0])];
    if (!anchor) continue;
    const span = clampTo(anchor, essayLength);
    if (!span) continue;
    redlined.add(sources[0]);
    const inner = evaluation.evaluation;
    decorations.push({
      key: `redline-r${index}`,
      start: span.start,
      end: span.end,
      style: 'redline',
      tooltip: `${inner.label}: ${inner.rationale_short} Fix: ${inner.requirements}`,
    });
  }

  const claimAnchor = result.anchors['0'];
  if (claimAnchor) {
    const span = clampTo(claimAnchor, essayLength);
    if (span) {
      decorations.push({
        key: 'main-claim',
        start: span.start,
        end: span.end,
        style: 'main-claim',
        tooltip: result.analysis.claim.content,
      });
    }
  }

  for (const [quoteIdText, anchor] of Object.entries(result.anchors)) {
    const quoteId = Number(quoteIdText);
    if (quoteId === 0 || redlined.has(quoteId)) continue;
    const span = clampTo(anchor, essayLength);
    if (!span) continue;
    decorations.push({
      key: `support-q${quoteId}`,
      start: span.start,
      end: span.end,
      style: 'support',
    });
  }

  decorations.sort((a, b) => a.start - b.start || a.end - b.end);
  return decorations;
}

// Socratic reflect mode: at most one focus highlight (the sentence under
// discussion) plus a marker per recorded comment. All other decorations are
// suppressed so attention stays on the active step.
export function socraticDecorations(
  focus: AnchoredSpan | null,
  comments: CommentDoc[],
  essayLength: number,
): Decoration[] {
  const decorations: Decoration[] = [];
  if (focus) {
    const span = clampTo(focus, essayLength);
    if (span) {
      decorations.push({ key: 'focus', start: span.start, end: span.end, style: 'focus' });
    }
  }
  comments.forEach((comment, index) => {
    const span = clampTo(comment.anchored, essayLength);
    if (!span) return;
    decorations.push({
      key: `comment-${index}`,
      start: span.start,
      end: span.end,
      style: 'comment-anchor',
      tooltip: comment.intention,
    });
  });
  return decorations;
}
