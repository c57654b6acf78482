// Chat panel: transcript, progress bar, comment margin, and suggestion
// chips. Suggestions copy text to the clipboard instead of editing the
// essay: the system never touches the user's words.

import type { CommentDoc, Progress, SuggestionDoc, TurnDoc } from './types.js';

export class ChatView {
  onSend: (text: string) => void = () => {};
  onSkip: () => void = () => {};

  private transcriptBox: HTMLElement;
  private progressBar: HTMLElement;
  private progressLabel: HTMLElement;
  private commentsBox: HTMLElement;
  private input: HTMLInputElement;
  private sendButton: HTMLButtonElement;
  private skipButton: HTMLButtonElement;
  private banner: HTMLElement;

  constructor(private container: HTMLElement) {
    container.replaceChildren();
    container.className = 'chat-panel';

    this.banner = el('div', 'chat-banner');
    this.transcriptBox = el('div', 'chat-transcript');
    const progressWrap = el('div', 'chat-progress');
    this.progressBar = el('div', 'chat-progress-bar');
    this.progressLabel = el('span', 'chat-progress-label');
    progressWrap.append(this.progressBar, this.progressLabel);
    this.commentsBox = el('div', 'chat-comments');

    const form = document.createElement('form');
    form.className = 'chat-form';
    this.input = document.createElement('input');
    this.input.type = 'text';
    this.input.placeholder = 'Answer the assistant...';
    this.sendButton = document.createElement('button');
    this.sendButton.type = 'submit';
    this.sendButton.textContent = 'Send';
    this.skipButton = document.createElement('button');
    this.skipButton.type = 'button';
    this.skipButton.textContent = 'Skip this step';
    this.skipButton.className = 'chat-skip';
    form.append(this.input, this.sendButton, this.skipButton);
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      const text = this.input.value.trim();
      if (!text) return;
      this.input.value = '';
      this.onSend(text);
    });
    this.skipButton.addEventListener('click', () => this.onSkip());

    container.append(this.banner, progressWrap, this.transcriptBox, this.commentsBox, form);
  }

  setBusy(busy: boolean): void {
    this.input.disabled = busy;
    this.sendButton.disabled = busy;
    this.skipButton.disabled = busy;
  }

  setFinished(finished: boolean): void {
    this.banner.textContent = finished ? 'All steps handled. Review your comment notes below.' : '';
    if (finished) this.setBusy(true);
  }

  renderTranscript(turns: TurnDoc[]): void {
    this.transcriptBox.replaceChildren();
    for (const turn of turns) {
      const bubble = el('div', `chat-turn chat-${turn.role}`);
      bubble.textContent = turn.text;
      this.transcriptBox.appendChild(bubble);
      if (turn.suggestion) this.transcriptBox.appendChild(this.renderSuggestion(turn.suggestion));
    }
  }

  renderProgress(progress: Progress): void {
    const percent = progress.total === 0 ? 100 : Math.round((100 * progress.resolved) / progress.total);
    this.progressBar.style.width = `${percent}%`;
    this.progressBar.dataset.resolved = String(progress.resolved);
    this.progressBar.dataset.total = String(progress.total);
    this.progressLabel.textContent = `${progress.resolved} / ${progress.total} issues resolved`;
  }

  renderComments(comments: CommentDoc[]): void {
    this.commentsBox.replaceChildren();
    for (const comment of comments) {
      const item = el('div', 'comment-marker');
      item.dataset.step = String(comment.step_number);
      const intention = el('div', 'comment-intention');
      intention.textContent = comment.intention;
      const quoteRef = el('div', 'comment-span');
      quoteRef.textContent = `anchored at ${comment.anchored.start}-${comment.anchored.end}`;
      item.append(intention, quoteRef);
      this.commentsBox.appendChild(item);
    }
  }

  private renderSuggestion(suggestion: SuggestionDoc): HTMLElement {
    const box = el('div', 'suggestion-chips');
    const entries: Array<{ original: string; suggestion: string }> = [];
    if (suggestion.claim_quote) entries.push(suggestion.claim_quote);
    for (const entry of suggestion.support_relations ?? []) entries.push(entry);
    for (const entry of entries) {
      const chip = el('div', 'suggestion-chip');
      const text = el('span', 'suggestion-text');
      text.textContent = entry.suggestion;
      text.title = `replaces: ${entry.original}`;
      const copy = document.createElement('button');
      copy.type = 'button';
      copy.textContent = 'Copy';
      copy.addEventListener('click', () => {
        void navigator.clipboard?.writeText(entry.suggestion);
      });
      const dismiss = document.createElement('button');
      dismiss.type = 'button';
      dismiss.textContent = 'Dismiss';
      dismiss.addEventListener('click', () => chip.remove());
      chip.append(text, copy, dismiss);
      box.appendChild(chip);
    }
    return box;
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}
