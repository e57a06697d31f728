// Wizard console: the hidden operator's page. Shows the activation cue for
// the chosen non-touch modality and lets the operator inject a typed value
// on exactly that channel; a mismatched channel surfaces the engine's
// channel_mismatch error instead of filling the parameter.

import { BridgeClient } from './bridge.js';
import type { Json, Modality } from './protocol.js';
import { INPUT_TOPICS, TOPICS, WIZARD_MODALITIES } from './protocol.js';

export interface WizardCue {
  instance: string;
  param: string;
  modality: Modality;
  dataType: string;
}

export class WizardConsole {
  cue: WizardCue | null = null;
  lastError: string | null = null;
  readonly element: HTMLElement;
  private readonly pendingEl: HTMLElement;
  private readonly errorEl: HTMLElement;
  private readonly channelEl: HTMLSelectElement;
  private readonly valueEl: HTMLTextAreaElement;

  constructor(private readonly bridge: BridgeClient) {
    this.element = document.createElement('div');
    this.element.className = 'wizard-console';
    this.pendingEl = document.createElement('p');
    this.pendingEl.className = 'wizard-pending';
    this.pendingEl.textContent = 'no input pending';
    this.errorEl = document.createElement('p');
    this.errorEl.className = 'wizard-error';
    this.channelEl = document.createElement('select');
    for (const modality of WIZARD_MODALITIES) {
      const option = document.createElement('option');
      option.value = modality;
      option.textContent = modality;
      this.channelEl.appendChild(option);
    }
    this.valueEl = document.createElement('textarea');
    this.valueEl.placeholder = '{"kind": "ObjectModelRef", "id": "bearing"}';
    const inject = document.createElement('button');
    inject.type = 'button';
    inject.textContent = 'inject value';
    inject.addEventListener('click', () => this.inject());
    this.element.append(this.pendingEl, this.channelEl, this.valueEl, inject, this.errorEl);

    for (const modality of WIZARD_MODALITIES) {
      const topic = INPUT_TOPICS[modality as Exclude<Modality, 'KeyboardMouse'>];
      bridge.subscribe(topic, (msg) => this.onChannelMessage(modality, msg));
    }
    bridge.subscribe(TOPICS.state, (msg) => this.onState(msg));
  }

  private onChannelMessage(modality: Modality, msg: Record<string, Json>): void {
    if (msg['type'] !== 'activate') return;
    this.cue = {
      instance: String(msg['instance']),
      param: String(msg['param']),
      modality,
      dataType: String(msg['dataType']),
    };
    this.channelEl.value = modality;
    this.pendingEl.textContent =
      `awaiting ${this.cue.dataType} for ${this.cue.instance}.${this.cue.param} ` +
      `via ${modality}`;
    this.render();
  }

  private onState(msg: Record<string, Json>): void {
    if (msg['type'] === 'error') {
      this.lastError = `${msg['code']}: ${msg['message'] ?? ''}`;
      this.render();
    } else if (msg['type'] === 'phase' && msg['phase'] !== 'AwaitingValue') {
      this.cue = null;
      this.pendingEl.textContent = 'no input pending';
      this.render();
    }
  }

  /** Publish the typed value on the selected channel. */
  inject(valueText?: string, channel?: Modality): void {
    const text = valueText ?? this.valueEl.value;
    const chosen = (channel ?? this.channelEl.value) as Exclude<Modality, 'KeyboardMouse'>;
    let value: Record<string, Json>;
    try {
      value = JSON.parse(text) as Record<string, Json>;
    } catch {
      this.lastError = 'value is not valid JSON';
      this.render();
      return;
    }
    const msg: Record<string, Json> = { value };
    if (this.cue) msg['param'] = this.cue.param;
    this.bridge.publish(INPUT_TOPICS[chosen], msg);
  }

  private render(): void {
    this.errorEl.textContent = this.lastError ?? '';
  }
}
