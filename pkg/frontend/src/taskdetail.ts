// Task detail page: the parameters required for a task instance, with
// pre/postconditions per skill requirement and subtask context. Each unset
// parameter row opens the modality chooser.

import { Card, Page, jsonPreview } from './pages.js';
import type { ParameterRequest, TaskDescription } from './protocol.js';

export function taskDetailPage(
  task: TaskDescription,
  currentRequest: ParameterRequest | null,
  onOpenParameter: (param: string) => void,
): Page {
  const paramItems = task.params.map((p) => ({
    id: p.name,
    label: `${p.name}: ${p.dataType}${p.unit ? ` (${p.unit})` : ''} — ${
      p.set ? jsonPreview(p.value) : 'unset'
    }`,
    onSelect: p.set ? undefined : (name: string) => onOpenParameter(name),
  }));

  const cards: Card[] = [
    {
      title: 'Parameters',
      sections: [{ kind: 'list', items: paramItems }],
    },
    {
      title: 'Preconditions',
      sections: [
        {
          kind: 'text',
          text: preconditionText(task),
        },
      ],
    },
    {
      title: 'Postconditions',
      sections: [{ kind: 'text', text: postconditionText(task) }],
    },
    {
      title: 'Subtasks',
      sections: [
        {
          kind: 'list',
          items: task.requiredSkills.map((skill) => ({ id: skill, label: skill })),
        },
      ],
    },
  ];
  if (currentRequest && currentRequest.instance === task.instance) {
    cards.unshift({
      title: `Next: ${currentRequest.param}`,
      sections: [{ kind: 'text', text: currentRequest.prompt }],
    });
  }
  return {
    id: `task:${task.instance}`,
    title: `${task.task} (${task.instance})`,
    cards,
    width: 2,
  };
}

function preconditionText(task: TaskDescription): string {
  const unset = task.params.filter((p) => p.required && !p.set).map((p) => p.name);
  return unset.length
    ? `parameters still required: ${unset.join(', ')}`
    : 'all parameters set; ready to expand';
}

function postconditionText(task: TaskDescription): string {
  return `executes skills: ${task.requiredSkills.join(', ')}`;
}
