// Execution monitor: streams trace events and phase changes from the
// bridge. Purely reactive; all state originates from engine messages.

import { BridgeClient } from './bridge.js';
import type { Json } from './protocol.js';
import { TOPICS } from './protocol.js';

export class ExecutionMonitor {
  readonly element: HTMLElement;
  readonly events: Record<string, Json>[] = [];
  phase = 'Editing';
  private readonly list: HTMLElement;
  private readonly phaseEl: HTMLElement;
  private readonly confirmButton: HTMLButtonElement;

  constructor(private readonly bridge: BridgeClient) {
    this.element = document.createElement('div');
    this.element.className = 'execution-monitor';
    this.phaseEl = document.createElement('p');
    this.phaseEl.className = 'monitor-phase';
    this.phaseEl.textContent = 'phase: Editing';
    this.confirmButton = document.createElement('button');
    this.confirmButton.type = 'button';
    this.confirmButton.textContent = 'human step done';
    this.confirmButton.hidden = true;
    this.confirmButton.addEventListener('click', () =>
      bridge.publish(TOPICS.confirm, {}),
    );
    this.list = document.createElement('ol');
    this.list.className = 'monitor-events';
    this.element.append(this.phaseEl, this.confirmButton, this.list);

    bridge.subscribe(TOPICS.trace, (msg) => this.onEvent(msg));
    bridge.subscribe(TOPICS.state, (msg) => this.onState(msg));
  }

  private onEvent(msg: Record<string, Json>): void {
    this.events.push(msg);
    const li = document.createElement('li');
    li.dataset['skill'] = String(msg['skill']);
    li.textContent = `#${msg['seq']} ${msg['skill']} → ${msg['outcome']}`;
    this.list.appendChild(li);
  }

  private onState(msg: Record<string, Json>): void {
    if (msg['type'] !== 'phase') return;
    this.phase = String(msg['phase']);
    const blocked = Boolean(msg['blocked']);
    this.phaseEl.textContent = `phase: ${this.phase}${blocked ? ' (waiting for human)' : ''}`;
    this.confirmButton.hidden = !blocked;
  }
}
