// Bootstraps the single-page client: pick a user id, connect, chat.

import { GatewayClient } from './client.js';
import type { MenuAction, RenderableReply } from './protocol.js';
import { renderEntryHtml, renderMenu } from './render.js';
import { applyReply, initialState, noteAction, noteSent, setConnected, type UiState } from './state.js';

const gatewayUrl = window.location.origin;

let state: UiState | null = null;
let client: GatewayClient | null = null;

const el = {
  login: document.getElementById('login') as HTMLElement,
  chat: document.getElementById('chat') as HTMLElement,
  userInput: document.getElementById('user-id') as HTMLInputElement,
  connectBtn: document.getElementById('connect') as HTMLButtonElement,
  banner: document.getElementById('banner') as HTMLElement,
  menu: document.getElementById('menu') as HTMLElement,
  transcript: document.getElementById('transcript') as HTMLElement,
  textInput: document.getElementById('text-input') as HTMLInputElement,
  sendBtn: document.getElementById('send') as HTMLButtonElement,
};

function redraw(): void {
  if (!state) {
    return;
  }
  el.banner.classList.toggle('hidden', state.connected);
  el.textInput.disabled = !state.connected;
  el.sendBtn.disabled = !state.connected;

  el.menu.replaceChildren(
    ...renderMenu(state).map((button) => {
      const node = document.createElement('button');
      node.textContent = button.label;
      node.disabled = !button.enabled;
      node.classList.toggle('highlighted', button.highlighted);
      node.addEventListener('click', () => void sendAction(button.action));
      return node;
    }),
  );

  el.transcript.innerHTML = state.transcript.map(renderEntryHtml).join('');
  el.transcript.scrollTop = el.transcript.scrollHeight;
}

function onPush(reply: RenderableReply): void {
  if (!state) {
    return;
  }
  applyReply(state, reply);
  redraw();
}

function onStatus(connected: boolean): void {
  if (!state) {
    return;
  }
  setConnected(state, connected);
  redraw();
}

async function sendAction(action: MenuAction): Promise<void> {
  if (!state || !client || !state.connected) {
    return;
  }
  const entry = noteSent(state, `[${action}]`, true);
  noteAction(state, action);
  redraw();
  try {
    const replies = await client.sendAction(action);
    entry.pending = false;
    replies.forEach((reply) => applyReply(state!, reply));
  } catch (error) {
    entry.pending = false;
    applyReply(state, { type: 'raw', raw: `send failed: ${String(error)}` });
  }
  redraw();
}

async function sendText(): Promise<void> {
  const text = el.textInput.value.trim();
  if (!state || !client || !state.connected || !text) {
    return;
  }
  el.textInput.value = '';
  const entry = noteSent(state, text, true);
  redraw();
  try {
    const replies = await client.sendText(text);
    entry.pending = false;
    replies.forEach((reply) => applyReply(state!, reply));
  } catch (error) {
    entry.pending = false;
    applyReply(state, { type: 'raw', raw: `send failed: ${String(error)}` });
  }
  redraw();
}

async function connect(): Promise<void> {
  const userId = el.userInput.value.trim();
  if (!userId) {
    el.userInput.focus();
    return;
  }
  state = initialState(userId);
  client = new GatewayClient(gatewayUrl, userId, { onPush, onStatus });
  el.login.classList.add('hidden');
  el.chat.classList.remove('hidden');
  const healthy = await client.health();
  setConnected(state, healthy);
  client.startPolling();
  redraw();
}

el.connectBtn.addEventListener('click', () => void connect());
el.userInput.addEventListener('keydown', (event) => {
  if (event.key === 'Enter') {
    void connect();
  }
});
el.sendBtn.addEventListener('click', () => void sendText());
el.textInput.addEventListener('keydown', (event) => {
  if (event.key === 'Enter') {
    void sendText();
  }
});
