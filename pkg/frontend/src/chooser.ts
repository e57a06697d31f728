// Modality chooser: one button per offered modality, best-ranked first.
// Protocol fidelity: the buttons are exactly the engine's ranked list; the
// chooser cannot invent or reorder modalities.

import type { Modality, ParameterRequest } from './protocol.js';

export function renderModalityChooser(
  request: ParameterRequest,
  onChoose: (modality: Modality) => void,
): HTMLElement {
  const el = document.createElement('div');
  el.className = 'modality-chooser';
  el.dataset['param'] = request.param;
  const label = document.createElement('p');
  label.textContent = request.prompt;
  el.appendChild(label);
  for (const modality of request.modalities) {
    const button = document.createElement('button');
    button.type = 'button';
    button.className = 'modality-button';
    button.dataset['modality'] = modality;
    button.textContent = modality;
    button.addEventListener('click', () => onChoose(modality));
    el.appendChild(button);
  }
  return el;
}

export function chooserModalities(el: HTMLElement): Modality[] {
  return Array.from(el.querySelectorAll<HTMLButtonElement>('.modality-button')).map(
    (b) => b.dataset['modality'] as Modality,
  );
}
