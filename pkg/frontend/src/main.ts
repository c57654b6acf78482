// Entry point: mount the controller onto the static page skeleton.

import { ApiClient } from './api.js';
import { AppController } from './app.js';

function mount(): void {
  const panes = {
    editor: document.getElementById('editor-pane') as HTMLElement,
    tree: document.getElementById('tree-pane') as HTMLElement,
    chat: document.getElementById('chat-pane') as HTMLElement,
    status: document.getElementById('status-line') as HTMLElement,
    essayInput: document.getElementById('essay-input') as HTMLTextAreaElement,
  };
  const app = new AppController(new ApiClient(''), panes);

  document.getElementById('analyze-visual')?.addEventListener('click', () => {
    void app.submitForAnalysis('visual');
  });
  document.getElementById('analyze-socratic')?.addEventListener('click', () => {
    void app.submitForAnalysis('socratic');
  });

  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get('session');
  if (sessionId) void app.rehydrate(sessionId);

  app.render();
}

document.addEventListener('DOMContentLoaded', mount);
