// Thin typed client over the JSON HTTP API. The browser talks only to these
// endpoints; provider keys and anchoring all stay server-side.

import type {
  AnalysisRecord,
  MessageResponse,
  SessionCreated,
  SessionStateDoc,
  CommentDoc,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body, keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.fetchFn(this.baseUrl + path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    }).then((response) => parseOrThrow<T>(response));
  }

  private get<T>(path: string): Promise<T> {
    return this.fetchFn(this.baseUrl + path).then((response) => parseOrThrow<T>(response));
  }

  createEssay(text: string): Promise<{ essay_id: string }> {
    return this.post('/essays', { text });
  }

  startAnalysis(essayId: string, mode: 'visual' | 'socratic'): Promise<{ analysis_id: string; status: string }> {
    return this.post(`/essays/${essayId}/analyze`, { mode });
  }

  getAnalysis(analysisId: string): Promise<AnalysisRecord> {
    return this.get(`/analyses/${analysisId}`);
  }

  async waitForAnalysis(
    analysisId: string,
    options: { pollMs?: number; maxMs?: number; onPoll?: (record: AnalysisRecord) => void } = {},
  ): Promise<AnalysisRecord> {
    const pollMs = options.pollMs ?? 400;
    const deadline = Date.now() + (options.maxMs ?? 120_000);
    let delay = pollMs;
    for (;;) {
      const record = await this.getAnalysis(analysisId);
      options.onPoll?.(record);
      if (record.status === 'done' || record.status === 'failed') return record;
      if (Date.now() > deadline) throw new ApiError(408, 'analysis polling timed out');
      await new Promise((resolve) => setTimeout(resolve, delay));
      delay = Math.min(delay * 1.5, 3_000);
    }
  }

  createSession(analysisId: string): Promise<SessionCreated> {
    return this.post('/sessions', { analysis_id: analysisId });
  }

  getSession(sessionId: string): Promise<SessionStateDoc> {
    return this.get(`/sessions/${sessionId}`);
  }

  sendMessage(sessionId: string, text: string): Promise<MessageResponse> {
    return this.post(`/sessions/${sessionId}/messages`, { text });
  }

  skipStep(sessionId: string): Promise<MessageResponse> {
    return this.post(`/sessions/${sessionId}/skip`, {});
  }

  getComments(essayId: string): Promise<{ essay_id: string; comments: Array<CommentDoc & { session_id: string }> }> {
    return this.get(`/essays/${essayId}/comments`);
  }
}
