// Application controller: ties the API client, the view state machine and
// the three panes together. Analysis is a single in-flight job (re-clicks
// join the running one); chat messages run through the serializing
// ChatController; the transcript is re-read from the server after every
// turn so nothing drifts.

import { ApiClient } from './api.js';
import { ChatController } from './chat.js';
import { ChatView } from './chatView.js';
import { EditorView } from './editorView.js';
import { ViewState } from './state.js';
import { buildSupportTree } from './tree.js';
import { TreeView } from './treeView.js';
import { relationSources } from './decorations.js';
import type { AnalysisRecord, MessageResponse } from './types.js';

export interface AppPanes {
  editor: HTMLElement;
  tree: HTMLElement;
  chat: HTMLElement;
  status: HTMLElement;
  essayInput: HTMLTextAreaElement;
}

export class AppController {
  state = new ViewState();
  editorView: EditorView;
  treeView: TreeView;
  chatView: ChatView;
  chat: ChatController | null = null;
  essayId: string | null = null;
  analysisId: string | null = null;
  sessionId: string | null = null;
  private analysisInFlight: Promise<AnalysisRecord | null> | null = null;

  constructor(
    private api: ApiClient,
    private panes: AppPanes,
  ) {
    this.editorView = new EditorView(panes.editor);
    this.treeView = new TreeView(panes.tree);
    this.chatView = new ChatView(panes.chat);
    this.treeView.onSelect = (quoteId) => this.pulseQuote(quoteId);
    this.chatView.onSend = (text) => void this.sendChat(text);
    this.chatView.onSkip = () => void this.skipStep();
  }

  // -- analyze -------------------------------------------------------------

  submitForAnalysis(mode: 'visual' | 'socratic'): Promise<AnalysisRecord | null> {
    // a second click while a job is running joins the same promise; the
    // server additionally deduplicates by (essay, mode, config)
    if (this.analysisInFlight) return this.analysisInFlight;
    const essay = this.panes.essayInput.value;
    if (!essay.trim()) {
      this.setStatus('write something first');
      return Promise.resolve(null);
    }
    this.state.startAnalyzing();
    this.render();
    this.analysisInFlight = this.runAnalysis(essay, mode).finally(() => {
      this.analysisInFlight = null;
    });
    return this.analysisInFlight;
  }

  private async runAnalysis(essay: string, mode: 'visual' | 'socratic'): Promise<AnalysisRecord | null> {
    try {
      this.setStatus('submitting essay...');
      const { essay_id } = await this.api.createEssay(essay);
      this.essayId = essay_id;
      const { analysis_id } = await this.api.startAnalysis(essay_id, mode);
      this.analysisId = analysis_id;
      const record = await this.api.waitForAnalysis(analysis_id, {
        pollMs: 250,
        onPoll: (r) => this.setStatus(`analyzing (${r.status})...`),
      });
      this.state.analysisDone(record);
      if (record.status === 'done' && this.state.mode === 'socratic-reflect') {
        await this.openSession();
      }
      this.setStatus(this.state.lastError ?? '');
      this.render();
      return record;
    } catch (error) {
      this.state.analysisFailed(String(error));
      this.setStatus(`analysis failed: ${String(error)}`);
      this.render();
      return null;
    }
  }

  // -- socratic session ------------------------------------------------------

  async openSession(): Promise<void> {
    if (!this.analysisId) return;
    const created = await this.api.createSession(this.analysisId);
    this.sessionId = created.session.session_id;
    this.state.sessionStarted(created.session, created.progress);
    this.chat = new ChatController(
      this.api,
      this.sessionId,
      (response) => this.applyTurn(response),
      (busy) => this.chatView.setBusy(busy),
    );
    this.render();
  }

  async rehydrate(sessionId: string): Promise<void> {
    const session = await this.api.getSession(sessionId);
    const record = await this.api.getAnalysis(session.analysis_id);
    this.sessionId = sessionId;
    this.analysisId = session.analysis_id;
    this.essayId = session.essay_id;
    this.state.analysisDone(record);
    this.state.sessionStarted(session, {
      resolved: Object.values(session.step_states).filter((s) => s === 'resolved').length,
      total: session.plan.steps.length,
    });
    this.chat = new ChatController(
      this.api,
      sessionId,
      (response) => this.applyTurn(response),
      (busy) => this.chatView.setBusy(busy),
    );
    this.render();
  }

  async sendChat(text: string): Promise<MessageResponse | null> {
    if (!this.chat || this.state.session?.finished) return null;
    return this.chat.send(text);
  }

  async skipStep(): Promise<void> {
    if (!this.sessionId || this.state.session?.finished) return;
    const response = await this.api.skipStep(this.sessionId);
    await this.applyTurn(response);
  }

  private async applyTurn(response: MessageResponse): Promise<void> {
    this.state.turnApplied(response.progress, response.focus, response.new_comments, response.finished);
    if (this.sessionId) {
      // transcript truth lives server-side (a resolution appends two turns)
      const session = await this.api.getSession(this.sessionId);
      this.state.session = session;
    }
    this.render();
  }

  // -- rendering -------------------------------------------------------------

  render(): void {
    const { state } = this;
    this.panes.editor.dataset.mode = state.mode;
    if (state.mode === 'write' || state.mode === 'analyzing') {
      this.editorView.render('', []);
    } else {
      this.editorView.render(state.essay, state.decorations());
    }

    const showTree = state.mode === 'visual-reflect' && state.analysis;
    this.panes.tree.hidden = !showTree;
    if (showTree && state.analysis) {
      this.treeView.render(buildSupportTree(state.analysis));
    }

    const showChat = state.mode === 'socratic-reflect' && state.session;
    this.panes.chat.hidden = !showChat;
    if (showChat && state.session) {
      this.chatView.renderTranscript(state.session.transcript);
      this.chatView.renderProgress(state.progress);
      this.chatView.renderComments(state.comments);
      this.chatView.setFinished(state.session.finished);
    }
  }

  private pulseQuote(quoteId: number): void {
    if (!this.state.analysis) return;
    this.editorView.pulse(this.decorationKeyFor(quoteId));
  }

  decorationKeyFor(quoteId: number): string {
    if (quoteId === 0) return 'main-claim';
    const analysis = this.state.analysis;
    if (analysis) {
      const relations = analysis.analysis.claim.support_relations.relations;
      for (const [indexText, evaluation] of Object.entries(analysis.evaluated.evaluations)) {
        if (evaluation.evaluation.strength !== 'invalid') continue;
        const entry = relations[Number(indexText)];
        if (entry && relationSources(entry)[0] === quoteId) {
          return `redline-r${indexText}`;
        }
      }
    }
    return `support-q${quoteId}`;
  }

  private setStatus(text: string): void {
    this.panes.status.textContent = text;
  }
}
