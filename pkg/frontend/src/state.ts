// Client-side mirror of the conversation: transcript in wire order plus
// session/actuator state gleaned from replies.

import type { MenuAction, RenderableReply } from './protocol.js';

export type Page = 'MAIN' | 'DRIP' | 'MIST' | 'MONITOR';

export type SwitchState = 'ON' | 'OFF' | 'UNKNOWN';

export interface TranscriptEntry {
  direction: 'sent' | 'received';
  reply?: RenderableReply;
  sentText?: string; // optimistic echo of outgoing traffic
  pending?: boolean; // not yet acknowledged by the gateway
}

export interface UiState {
  userId: string;
  connected: boolean;
  sessionActive: boolean;
  currentPage: Page;
  drip: SwitchState;
  mist: SwitchState;
  transcript: TranscriptEntry[];
}

export function initialState(userId: string): UiState {
  return {
    userId,
    connected: false,
    sessionActive: false,
    currentPage: 'MAIN',
    drip: 'UNKNOWN',
    mist: 'UNKNOWN',
    transcript: [],
  };
}

const PAGE_BY_ACTION: Partial<Record<MenuAction, Page>> = {
  SHOW_MAIN: 'MAIN',
  SHOW_DRIP: 'DRIP',
  SHOW_MIST: 'MIST',
  SHOW_MONITOR: 'MONITOR',
};

export function noteSent(state: UiState, label: string, pending: boolean): TranscriptEntry {
  const entry: TranscriptEntry = { direction: 'sent', sentText: label, pending };
  state.transcript.push(entry);
  return entry;
}

export function noteAction(state: UiState, action: MenuAction): void {
  const page = PAGE_BY_ACTION[action];
  if (page) {
    state.currentPage = page;
  }
}

/** Fold one received frame into the state; transcript order is wire order. */
export function applyReply(state: UiState, reply: RenderableReply): void {
  state.transcript.push({ direction: 'received', reply });
  if (reply.type === 'text') {
    if (reply.text.includes('session is active')) {
      state.sessionActive = true;
    } else if (reply.text.includes('Session stopped') || reply.text.includes('not active')) {
      state.sessionActive = false;
    }
    const commanded = reply.text.match(/^(Drip|Mist) irrigation is (?:now|already) (ON|OFF)\.$/);
    if (commanded) {
      const [, target, value] = commanded;
      if (target === 'Drip') {
        state.drip = value as SwitchState;
      } else {
        state.mist = value as SwitchState;
      }
    }
  } else if (reply.type === 'card') {
    for (const field of reply.card.fields) {
      if (field.label === 'drip' && (field.value === 'ON' || field.value === 'OFF')) {
        state.drip = field.value;
      }
      if (field.label === 'mist' && (field.value === 'ON' || field.value === 'OFF')) {
        state.mist = field.value;
      }
    }
  }
}

export function setConnected(state: UiState, connected: boolean): void {
  state.connected = connected;
}
