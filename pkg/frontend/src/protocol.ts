// Wire frames spoken with the gateway. Shapes mirror the server schema:
// inbound  {"type":"message"|"postback","event_id","user_id","ts",("text"|"action")}
// outbound {"type":"text"|"video"|"card","user_id",("text"|"url"|"card")}

export const MENU_ACTIONS = [
  'TOGGLE_SESSION',
  'SHOW_MAIN',
  'SHOW_DRIP',
  'SHOW_MIST',
  'SHOW_MONITOR',
  'DRIP_ON',
  'DRIP_OFF',
  'MIST_ON',
  'MIST_OFF',
] as const;

export type MenuAction = (typeof MENU_ACTIONS)[number];

export interface TextEventFrame {
  type: 'message';
  event_id: string;
  user_id: string;
  ts: number;
  text: string;
}

export interface PostbackEventFrame {
  type: 'postback';
  event_id: string;
  user_id: string;
  ts: number;
  action: MenuAction;
}

export type InboundFrame = TextEventFrame | PostbackEventFrame;

export interface CardField {
  label: string;
  value: string;
}

export interface TextReply {
  type: 'text';
  user_id: string;
  text: string;
}

export interface VideoReply {
  type: 'video';
  user_id: string;
  url: string;
}

export interface CardReply {
  type: 'card';
  user_id: string;
  card: { title: string; fields: CardField[] };
}

export type ReplyFrame = TextReply | VideoReply | CardReply;

/** Reply that failed validation; rendered as a raw fallback bubble, never dropped. */
export interface RawReply {
  type: 'raw';
  raw: string;
}

export type RenderableReply = ReplyFrame | RawReply;

export interface FrameSource {
  nextEventId(): string;
  now(): number; // unix seconds
}

/** Monotonic event ids plus wall-clock timestamps for live sessions. */
export function defaultFrameSource(userId: string): FrameSource {
  let counter = 0;
  return {
    nextEventId: () => `${userId}-${Date.now()}-${++counter}`,
    now: () => Math.floor(Date.now() / 1000),
  };
}

export function buildTextFrame(userId: string, text: string, source: FrameSource): TextEventFrame {
  return {
    type: 'message',
    event_id: source.nextEventId(),
    user_id: userId,
    ts: source.now(),
    text,
  };
}

export function buildPostbackFrame(
  userId: string,
  action: MenuAction,
  source: FrameSource,
): PostbackEventFrame {
  return {
    type: 'postback',
    event_id: source.nextEventId(),
    user_id: userId,
    ts: source.now(),
    action,
  };
}

export function encodeFrame(frame: InboundFrame): string {
  return JSON.stringify(frame);
}

function isCardField(value: unknown): value is CardField {
  return (
    typeof value === 'object' &&
    value !== null &&
    typeof (value as CardField).label === 'string' &&
    typeof (value as CardField).value === 'string'
  );
}

/**
 * Parse one outbound frame. Unknown or malformed frames degrade to a raw
 * fallback entry so nothing the server says is ever dropped.
 */
export function parseReply(input: unknown): RenderableReply {
  const raw = typeof input === 'string' ? input : JSON.stringify(input);
  let obj: unknown = input;
  if (typeof input === 'string') {
    try {
      obj = JSON.parse(input);
    } catch {
      return { type: 'raw', raw };
    }
  }
  if (typeof obj !== 'object' || obj === null) {
    return { type: 'raw', raw };
  }
  const frame = obj as Record<string, unknown>;
  if (typeof frame.user_id !== 'string') {
    return { type: 'raw', raw };
  }
  if (frame.type === 'text' && typeof frame.text === 'string') {
    return { type: 'text', user_id: frame.user_id, text: frame.text };
  }
  if (frame.type === 'video' && typeof frame.url === 'string') {
    return { type: 'video', user_id: frame.user_id, url: frame.url };
  }
  if (frame.type === 'card') {
    const card = frame.card as { title?: unknown; fields?: unknown } | undefined;
    if (
      card &&
      typeof card.title === 'string' &&
      Array.isArray(card.fields) &&
      card.fields.length >= 1 &&
      card.fields.every(isCardField)
    ) {
      return {
        type: 'card',
        user_id: frame.user_id,
        card: { title: card.title, fields: card.fields as CardField[] },
      };
    }
  }
  return { type: 'raw', raw };
}
