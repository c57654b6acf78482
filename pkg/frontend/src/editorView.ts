// Essay pane: renders the text with decoration marks computed from
// server-provided spans. Overlaps resolve by priority so the focus highlight
// always wins over structural styling.

import type { Decoration, DecorationStyle } from './decorations.js';

const PRIORITY: Record<DecorationStyle, number> = {
  focus: 5,
  redline: 4,
  'comment-anchor': 3,
  'main-claim': 2,
  support: 1,
};

export interface Segment {
  start: number;
  end: number;
  decoration: Decoration | null;
}

export function computeSegments(length: number, decorations: Decoration[]): Segment[] {
  const boundaries = new Set<number>([0, length]);
  for (const decoration of decorations) {
    boundaries.add(Math.max(0, Math.min(length, decoration.start)));
    boundaries.add(Math.max(0, Math.min(length, decoration.end)));
  }
  const points = [...boundaries].sort((a, b) => a - b);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < points.length; i += 1) {
    const [start, end] = [points[i], points[i + 1]];
    if (start >= end) continue;
    let winner: Decoration | null = null;
    for (const decoration of decorations) {
      if (decoration.start <= start && end <= decoration.end) {
        if (!winner || PRIORITY[decoration.style] > PRIORITY[winner.style]) {
          winner = decoration;
        }
      }
    }
    segments.push({ start, end, decoration: winner });
  }
  return segments;
}

export class EditorView {
  constructor(private container: HTMLElement) {}

  render(essay: string, decorations: Decoration[]): void {
    this.container.replaceChildren();
    for (const segment of computeSegments(essay.length, decorations)) {
      const text = essay.slice(segment.start, segment.end);
      if (!segment.decoration) {
        this.container.appendChild(document.createTextNode(text));
        continue;
      }
      const mark = document.createElement('mark');
      mark.className = `deco deco-${segment.decoration.style}`;
      mark.dataset.key = segment.decoration.key;
      if (segment.decoration.tooltip) mark.title = segment.decoration.tooltip;
      mark.textContent = text;
      this.container.appendChild(mark);
    }
  }

  marks(style?: DecorationStyle): HTMLElement[] {
    const selector = style ? `mark.deco-${style}` : 'mark.deco';
    return [...this.container.querySelectorAll<HTMLElement>(selector)];
  }

  // Scroll to and briefly pulse every mark belonging to a decoration key.
  pulse(key: string): void {
    const targets = [...this.container.querySelectorAll<HTMLElement>(`mark[data-key="${key}"]`)];
    targets.forEach((mark, index) => {
      if (index === 0 && typeof mark.scrollIntoView === 'function') {
        mark.scrollIntoView({ block: 'center' });
      }
      mark.classList.add('pulse');
      setTimeout(() => mark.classList.remove('pulse'), 900);
    });
  }
}
