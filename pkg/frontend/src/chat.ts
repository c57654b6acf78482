// Chat sending discipline: one request in flight per session, everything
// else queued locally, so the server's per-session serialization (429 on
// races) never surfaces to the user. If a 429 does arrive (another tab,
// lost race), the message is retried exactly once after the in-flight
// request settles.

import { ApiClient, ApiError } from './api.js';
import type { MessageResponse } from './types.js';

export class ChatController {
  private queue: Array<{ text: string; resolve: (r: MessageResponse) => void; reject: (e: unknown) => void }> = [];
  private draining = false;
  busy = false;

  constructor(
    private api: ApiClient,
    private sessionId: string,
    private onResponse: (response: MessageResponse) => void | Promise<void>,
    private onBusyChange: (busy: boolean) => void = () => {},
  ) {}

  send(text: string): Promise<MessageResponse> {
    return new Promise((resolve, reject) => {
      this.queue.push({ text, resolve, reject });
      void this.drain();
    });
  }

  private setBusy(busy: boolean): void {
    this.busy = busy;
    this.onBusyChange(busy);
  }

  private async drain(): Promise<void> {
    if (this.draining) return;
    this.draining = true;
    this.setBusy(true);
    try {
      while (this.queue.length > 0) {
        const item = this.queue.shift()!;
        try {
          const response = await this.sendWithSingleRetry(item.text);
          await this.onResponse(response);
          item.resolve(response);
        } catch (error) {
          item.reject(error);
        }
      }
    } finally {
      this.draining = false;
      this.setBusy(false);
    }
  }

  private async sendWithSingleRetry(text: string): Promise<MessageResponse> {
    try {
      return await this.api.sendMessage(this.sessionId, text);
    } catch (error) {
      if (error instanceof ApiError && error.status === 429) {
        await new Promise((resolve) => setTimeout(resolve, 150));
        return await this.api.sendMessage(this.sessionId, text);
      }
      throw error;
    }
  }
}
