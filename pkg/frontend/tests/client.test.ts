// GatewayClient transport behavior with an injected fetch.

import { describe, expect, it, vi } from 'vitest';

import { GatewayClient } from '../src/client.js';

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

describe('send', () => {
  it('posts one canonical frame and parses the reply batch', async () => {
    const fetchFn = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      expect(String(url)).toBe('http://gw/events');
      const frame = JSON.parse(String(init?.body));
      expect(frame.type).toBe('postback');
      expect(frame.action).toBe('SHOW_MONITOR');
      expect(typeof frame.event_id).toBe('string');
      return jsonResponse(200, {
        replies: [{ type: 'card', user_id: 'u1', card: { title: 'Field status', fields: [{ label: 'drip', value: 'OFF' }] } }],
      });
    });
    const client = new GatewayClient('http://gw', 'u1', { fetchFn: fetchFn as typeof fetch });
    const replies = await client.sendAction('SHOW_MONITOR');
    expect(replies).toHaveLength(1);
    expect(replies[0]?.type).toBe('card');
    expect(fetchFn).toHaveBeenCalledTimes(1);
  });

  it('retries transport failures with backoff and eventually succeeds', async () => {
    let calls = 0;
    const fetchFn = vi.fn(async () => {
      calls += 1;
      if (calls < 3) {
        throw new TypeError('network down');
      }
      return jsonResponse(200, { replies: [{ type: 'text', user_id: 'u1', text: 'ok' }] });
    });
    const statuses: boolean[] = [];
    const client = new GatewayClient('http://gw', 'u1', {
      fetchFn: fetchFn as typeof fetch,
      retryDelayMs: 1,
      onStatus: (s) => statuses.push(s),
    });
    const replies = await client.sendText('hello');
    expect(replies[0]).toEqual({ type: 'text', user_id: 'u1', text: 'ok' });
    expect(calls).toBe(3);
    expect(statuses).toEqual([false, false, true]);
  });

  it('gives up after maxRetries and surfaces the failure', async () => {
    const fetchFn = vi.fn(async () => {
      throw new TypeError('network down');
    });
    const client = new GatewayClient('http://gw', 'u1', {
      fetchFn: fetchFn as typeof fetch,
      retryDelayMs: 1,
      maxRetries: 2,
    });
    await expect(client.sendText('hello')).rejects.toThrow('network down');
    expect(fetchFn).toHaveBeenCalledTimes(3);
  });

  it('does not retry protocol rejections', async () => {
    const fetchFn = vi.fn(async () => jsonResponse(400, { error: 'unknown action' }));
    const client = new GatewayClient('http://gw', 'u1', {
      fetchFn: fetchFn as typeof fetch,
      retryDelayMs: 1,
    });
    await expect(client.sendText('x')).rejects.toThrow('gateway rejected frame');
    expect(fetchFn).toHaveBeenCalledTimes(1);
  });
});

describe('pollOnce', () => {
  it('drains queued pushes', async () => {
    const fetchFn = vi.fn(async (url: RequestInfo | URL) => {
      expect(String(url)).toContain('/poll?user_id=u1');
      return jsonResponse(200, { messages: [{ type: 'text', user_id: 'u1', text: 'alert' }] });
    });
    const client = new GatewayClient('http://gw', 'u1', { fetchFn: fetchFn as typeof fetch });
    const messages = await client.pollOnce();
    expect(messages).toHaveLength(1);
  });
});
