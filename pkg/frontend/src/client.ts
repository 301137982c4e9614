// HTTP client for the gateway: POST /events with retry/backoff, and a
// long-poll loop on GET /poll for server-initiated pushes.

import {
  buildPostbackFrame,
  buildTextFrame,
  defaultFrameSource,
  encodeFrame,
  parseReply,
  type FrameSource,
  type InboundFrame,
  type MenuAction,
  type RenderableReply,
} from './protocol.js';

export interface ClientOptions {
  fetchFn?: typeof fetch;
  source?: FrameSource;
  maxRetries?: number;
  retryDelayMs?: number;
  pollWaitSeconds?: number;
  onPush?: (reply: RenderableReply) => void;
  onStatus?: (connected: boolean) => void;
}

export class GatewayClient {
  readonly baseUrl: string;
  readonly userId: string;
  private readonly fetchFn: typeof fetch;
  private readonly source: FrameSource;
  private readonly maxRetries: number;
  private readonly retryDelayMs: number;
  private readonly pollWaitSeconds: number;
  private readonly onPush?: (reply: RenderableReply) => void;
  private readonly onStatus?: (connected: boolean) => void;
  private polling = false;

  constructor(baseUrl: string, userId: string, options: ClientOptions = {}) {
    this.baseUrl = baseUrl.replace(/\/$/, '');
    this.userId = userId;
    this.fetchFn = options.fetchFn ?? fetch.bind(globalThis);
    this.source = options.source ?? defaultFrameSource(userId);
    this.maxRetries = options.maxRetries ?? 3;
    this.retryDelayMs = options.retryDelayMs ?? 400;
    this.pollWaitSeconds = options.pollWaitSeconds ?? 20;
    this.onPush = options.onPush;
    this.onStatus = options.onStatus;
  }

  sendText(text: string): Promise<RenderableReply[]> {
    return this.send(buildTextFrame(this.userId, text, this.source));
  }

  sendAction(action: MenuAction): Promise<RenderableReply[]> {
    return this.send(buildPostbackFrame(this.userId, action, this.source));
  }

  /** POST one frame; transient transport failures retry with backoff. */
  async send(frame: InboundFrame): Promise<RenderableReply[]> {
    let lastError: unknown;
    for (let attempt = 0; attempt <= this.maxRetries; attempt++) {
      if (attempt > 0) {
        await delay(this.retryDelayMs * 2 ** (attempt - 1));
      }
      try {
        const response = await this.fetchFn(`${this.baseUrl}/events`, {
          method: 'POST',
          headers: { 'Content-Type': 'application/json' },
          body: encodeFrame(frame),
        });
        if (response.status === 400) {
          // protocol error: retrying the same bytes cannot help
          const detail = await response.text();
          this.onStatus?.(true);
          throw new Error(`gateway rejected frame: ${detail}`);
        }
        if (!response.ok) {
          throw new Error(`gateway returned ${response.status}`);
        }
        const body = (await response.json()) as { replies?: unknown[] };
        this.onStatus?.(true);
        return (body.replies ?? []).map(parseReply);
      } catch (error) {
        lastError = error;
        if (error instanceof Error && error.message.startsWith('gateway rejected frame')) {
          throw error;
        }
        this.onStatus?.(false);
      }
    }
    throw lastError instanceof Error ? lastError : new Error(String(lastError));
  }

  async health(): Promise<boolean> {
    try {
      const response = await this.fetchFn(`${this.baseUrl}/health`);
      const ok = response.ok;
      this.onStatus?.(ok);
      return ok;
    } catch {
      this.onStatus?.(false);
      return false;
    }
  }

  /** Drain queued pushes once. */
  async pollOnce(waitSeconds = 0): Promise<RenderableReply[]> {
    const url = `${this.baseUrl}/poll?user_id=${encodeURIComponent(this.userId)}&wait=${waitSeconds}`;
    const response = await this.fetchFn(url);
    if (!response.ok) {
      throw new Error(`poll returned ${response.status}`);
    }
    const body = (await response.json()) as { messages?: unknown[] };
    return (body.messages ?? []).map(parseReply);
  }

  startPolling(): void {
    if (this.polling) {
      return;
    }
    this.polling = true;
    void this.pollLoop();
  }

  stopPolling(): void {
    this.polling = false;
  }

  private async pollLoop(): Promise<void> {
    while (this.polling) {
      try {
        const messages = await this.pollOnce(this.pollWaitSeconds);
        this.onStatus?.(true);
        for (const message of messages) {
          this.onPush?.(message);
        }
      } catch {
        this.onStatus?.(false);
        await delay(this.retryDelayMs * 4);
      }
    }
  }
}

function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
