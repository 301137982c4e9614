// Pure view helpers: menu button models and HTML for transcript entries.
// Kept DOM-free so they are unit-testable; main.ts attaches them to the page.

import type { MenuAction, RenderableReply } from './protocol.js';
import type { TranscriptEntry, UiState } from './state.js';

export interface MenuButton {
  action: MenuAction;
  label: string;
  enabled: boolean;
  highlighted: boolean;
}

const PRIMARY_BUTTONS: Array<[MenuAction, string]> = [
  ['TOGGLE_SESSION', 'START/STOP'],
  ['SHOW_MAIN', 'MAIN'],
  ['SHOW_DRIP', 'DRIP'],
  ['SHOW_MIST', 'MIST'],
  ['SHOW_MONITOR', 'MONITOR'],
];

/**
 * The persistent rich menu: the five functions always visible, plus ON/OFF
 * controls on the drip/mist pages reflecting the last known switch state.
 * Everything is disabled while disconnected.
 */
export function renderMenu(state: UiState): MenuButton[] {
  const buttons: MenuButton[] = PRIMARY_BUTTONS.map(([action, label]) => ({
    action,
    label,
    enabled: state.connected,
    highlighted: action === 'TOGGLE_SESSION' ? state.sessionActive : pageOf(action) === state.currentPage,
  }));
  if (state.currentPage === 'DRIP') {
    buttons.push(
      { action: 'DRIP_ON', label: 'Drip ON', enabled: state.connected, highlighted: state.drip === 'ON' },
      { action: 'DRIP_OFF', label: 'Drip OFF', enabled: state.connected, highlighted: state.drip === 'OFF' },
    );
  }
  if (state.currentPage === 'MIST') {
    buttons.push(
      { action: 'MIST_ON', label: 'Mist ON', enabled: state.connected, highlighted: state.mist === 'ON' },
      { action: 'MIST_OFF', label: 'Mist OFF', enabled: state.connected, highlighted: state.mist === 'OFF' },
    );
  }
  return buttons;
}

function pageOf(action: MenuAction): string | null {
  switch (action) {
    case 'SHOW_MAIN':
      return 'MAIN';
    case 'SHOW_DRIP':
      return 'DRIP';
    case 'SHOW_MIST':
      return 'MIST';
    case 'SHOW_MONITOR':
      return 'MONITOR';
    default:
      return null;
  }
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

/** TEXT -> bubble, VIDEO -> titled link, CARD -> key/value table, raw -> fallback. */
export function renderReplyHtml(reply: RenderableReply): string {
  switch (reply.type) {
    case 'text':
      return `<div class="bubble bot-bubble">${escapeHtml(reply.text).replace(/\n/g, '<br>')}</div>`;
    case 'video':
      return (
        `<div class="bubble bot-bubble video-bubble">` +
        `<a href="${escapeHtml(reply.url)}" target="_blank" rel="noopener">` +
        `<span class="video-thumb">&#9658;</span> Today's knowledge video</a></div>`
      );
    case 'card': {
      const rows = reply.card.fields
        .map(
          (field) =>
            `<tr><td class="card-label">${escapeHtml(field.label)}</td>` +
            `<td class="card-value">${escapeHtml(field.value)}</td></tr>`,
        )
        .join('');
      return (
        `<div class="bubble bot-bubble card-bubble">` +
        `<div class="card-title">${escapeHtml(reply.card.title)}</div>` +
        `<table class="card-table">${rows}</table></div>`
      );
    }
    case 'raw':
      return `<div class="bubble bot-bubble raw-bubble">${escapeHtml(reply.raw)}</div>`;
  }
}

export function renderEntryHtml(entry: TranscriptEntry): string {
  if (entry.direction === 'sent') {
    const pending = entry.pending ? ' pending' : '';
    return `<div class="bubble user-bubble${pending}">${escapeHtml(entry.sentText ?? '')}</div>`;
  }
  return entry.reply ? renderReplyHtml(entry.reply) : '';
}
