// Touch input flows per data type. Each flow builds a form-like element and
// reports a wire-format value through onSubmit; the engine re-validates, so
// the UI never needs to be authoritative about typing.

import type { Json, ParameterRequest } from './protocol.js';
import {
  ModelDoc,
  bestPlane,
  hitTestEdge,
  hitTestVertex,
  project,
} from './projection.js';

export interface TouchContext {
  models: ModelDoc[];
  materials: { material: string; thickness_mm: number }[];
  catalogs: Record<string, string[]>;
  table: { width: number; depth: number };
  /** model the current task operates on, when one of its parameters set it */
  activeModel?: string;
}

export const DEFAULT_CATALOGS: Record<string, string[]> = {
  grinding_papers: ['P60', 'P120', 'P240'],
  deburring_profiles: ['rounded', 'flat'],
  screws: ['M4x10', 'M5x12', 'M6x20'],
  glues: ['epoxy', 'superglue', 'wood glue'],
};

type Submit = (value: Record<string, Json>) => void;

export function buildTouchInput(
  request: ParameterRequest,
  context: TouchContext,
  onSubmit: Submit,
): HTMLElement {
  switch (request.dataType) {
    case 'ObjectModelRef':
      return modelList(context, onSubmit);
    case 'Location3D':
      return tablePicker(context, onSubmit);
    case 'Number':
      return numberForm(request.unit ?? 'mm', onSubmit);
    case 'ListSelection':
      return choiceList(context.catalogs[request.catalog ?? ''] ?? [], onSubmit);
    case 'MaterialRef':
      return materialList(context, onSubmit);
    case 'VertexRef':
      return modelPicker(context, 'vertex', onSubmit);
    case 'EdgeRef':
      return modelPicker(context, 'edge', onSubmit);
    case 'ConstraintSet':
      return constraintForm(context, onSubmit);
    case 'Pose6D':
      return poseForm(onSubmit);
    case 'PoseArray':
      return poseArrayForm(onSubmit);
  }
}

function modelList(context: TouchContext, onSubmit: Submit): HTMLElement {
  const el = document.createElement('ul');
  el.className = 'touch-object-list';
  for (const model of context.models) {
    const li = document.createElement('li');
    const button = document.createElement('button');
    button.type = 'button';
    button.dataset['modelId'] = model.id;
    button.textContent = model.id;
    button.addEventListener('click', () =>
      onSubmit({ kind: 'ObjectModelRef', id: model.id }),
    );
    li.appendChild(button);
    el.appendChild(li);
  }
  return el;
}

function tablePicker(context: TouchContext, onSubmit: Submit): HTMLElement {
  const el = document.createElement('div');
  el.className = 'touch-table';
  el.style.position = 'relative';
  el.style.width = '100%';
  el.style.aspectRatio = `${context.table.width} / ${context.table.depth}`;
  el.title = 'tap a spot on the table';
  el.addEventListener('click', (event: MouseEvent) => {
    const rect = el.getBoundingClientRect();
    const width = rect.width || 1;
    const height = rect.height || 1;
    const x = ((event.clientX - rect.left) / width - 0.5) * context.table.width;
    const y = (0.5 - (event.clientY - rect.top) / height) * context.table.depth;
    onSubmit({
      kind: 'Location3D',
      x: Math.round(x * 1e6) / 1e6,
      y: Math.round(y * 1e6) / 1e6,
      z: 0,
    });
  });
  return el;
}

function numberForm(unit: string, onSubmit: Submit): HTMLElement {
  const el = document.createElement('form');
  el.className = 'touch-number';
  const input = document.createElement('input');
  input.type = 'number';
  input.step = 'any';
  input.name = 'value';
  const suffix = document.createElement('span');
  suffix.textContent = unit;
  const submit = document.createElement('button');
  submit.type = 'submit';
  submit.textContent = 'set';
  el.append(input, suffix, submit);
  el.addEventListener('submit', (event) => {
    event.preventDefault();
    const value = Number(input.value);
    if (Number.isFinite(value)) onSubmit({ kind: 'Number', value, unit });
  });
  return el;
}

function choiceList(choices: string[], onSubmit: Submit): HTMLElement {
  const el = document.createElement('ul');
  el.className = 'touch-choice-list';
  for (const choice of choices) {
    const li = document.createElement('li');
    const button = document.createElement('button');
    button.type = 'button';
    button.textContent = choice;
    button.addEventListener('click', () => onSubmit({ kind: 'ListSelection', choice }));
    li.appendChild(button);
    el.appendChild(li);
  }
  return el;
}

function materialList(context: TouchContext, onSubmit: Submit): HTMLElement {
  const el = document.createElement('ul');
  el.className = 'touch-material-list';
  for (const entry of context.materials) {
    const li = document.createElement('li');
    const button = document.createElement('button');
    button.type = 'button';
    button.textContent = `${entry.material} ${entry.thickness_mm} mm`;
    button.addEventListener('click', () =>
      onSubmit({
        kind: 'MaterialRef',
        material: entry.material,
        thickness_mm: entry.thickness_mm,
      }),
    );
    li.appendChild(button);
    el.appendChild(li);
  }
  return el;
}

const PICKER_SIZE = 320;
const PICK_TOLERANCE_PX = 14;

/** Orthographic model view with clickable vertices/edges. */
function modelPicker(
  context: TouchContext,
  mode: 'vertex' | 'edge',
  onSubmit: Submit,
): HTMLElement {
  const el = document.createElement('div');
  el.className = 'touch-model-picker';
  const candidates = context.activeModel
    ? context.models.filter((m) => m.id === context.activeModel)
    : context.models.filter((m) => Object.keys(m.vertices).length > 0);
  const model = candidates[0];
  if (!model) {
    el.textContent = 'no model with selectable geometry';
    return el;
  }
  const projected = project(model, bestPlane(model));
  const { toPixel, fromPixel } = fitToViewport(projected, PICKER_SIZE);

  const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
  svg.setAttribute('width', String(PICKER_SIZE));
  svg.setAttribute('height', String(PICKER_SIZE));
  svg.dataset['model'] = model.id;
  for (const [id, [a, b]] of Object.entries(projected.edges)) {
    const [ax, ay] = toPixel(a);
    const [bx, by] = toPixel(b);
    const line = document.createElementNS('http://www.w3.org/2000/svg', 'line');
    line.setAttribute('x1', String(ax));
    line.setAttribute('y1', String(ay));
    line.setAttribute('x2', String(bx));
    line.setAttribute('y2', String(by));
    line.dataset['edgeId'] = id;
    line.setAttribute('stroke', '#456');
    line.setAttribute('stroke-width', '3');
    svg.appendChild(line);
  }
  for (const [id, v] of Object.entries(projected.vertices)) {
    const [x, y] = toPixel(v);
    const circle = document.createElementNS('http://www.w3.org/2000/svg', 'circle');
    circle.setAttribute('cx', String(x));
    circle.setAttribute('cy', String(y));
    circle.setAttribute('r', '5');
    circle.dataset['vertexId'] = id;
    circle.setAttribute('fill', '#269');
    svg.appendChild(circle);
  }
  svg.addEventListener('click', (event: MouseEvent) => {
    const rect = svg.getBoundingClientRect();
    const point = fromPixel([
      event.clientX - rect.left,
      event.clientY - rect.top,
    ]);
    const tolerance = fromPixelDistance(PICK_TOLERANCE_PX, toPixel);
    const hit = pickAt(projected, mode, point, tolerance);
    if (hit) {
      onSubmit(
        mode === 'vertex'
          ? { kind: 'VertexRef', id: hit, model: model.id }
          : { kind: 'EdgeRef', id: hit, model: model.id },
      );
    }
  });
  el.appendChild(svg);
  return el;
}

export function pickAt(
  projected: ReturnType<typeof project>,
  mode: 'vertex' | 'edge',
  point: [number, number],
  tolerance: number,
): string | null {
  return mode === 'vertex'
    ? hitTestVertex(projected, point, tolerance)
    : hitTestEdge(projected, point, tolerance);
}

function fitToViewport(projected: ReturnType<typeof project>, size: number) {
  const points = Object.values(projected.vertices);
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  const minX = Math.min(...xs, 0);
  const maxX = Math.max(...xs, 0);
  const minY = Math.min(...ys, 0);
  const maxY = Math.max(...ys, 0);
  const span = Math.max(maxX - minX, maxY - minY, 1e-6);
  const margin = 0.1 * span;
  const scale = size / (span + 2 * margin);
  const toPixel = (p: [number, number]): [number, number] => [
    (p[0] - minX + margin) * scale,
    size - (p[1] - minY + margin) * scale,
  ];
  const fromPixel = (px: [number, number]): [number, number] => [
    px[0] / scale + minX - margin,
    (size - px[1]) / scale + minY - margin,
  ];
  return { toPixel, fromPixel };
}

function fromPixelDistance(
  px: number,
  toPixel: (p: [number, number]) => [number, number],
): number {
  const [x0] = toPixel([0, 0]);
  const [x1] = toPixel([1, 0]);
  const scale = Math.abs(x1 - x0) || 1;
  return px / scale;
}

const CONSTRAINT_KINDS = ['Concentric', 'Coplanar', 'Distance', 'AgainstCollar'] as const;

/** Pair features of the two assembly parts with a constraint kind. */
function constraintForm(context: TouchContext, onSubmit: Submit): HTMLElement {
  const el = document.createElement('form');
  el.className = 'touch-constraints';
  const kind = select('kind', [...CONSTRAINT_KINDS]);
  const featureA = input('featureA', 'feature on part');
  const featureB = input('featureB', 'feature on assembly');
  const millimeters = input('millimeters', 'distance mm');
  millimeters.value = '0';
  const add = document.createElement('button');
  add.type = 'submit';
  add.textContent = 'add constraint';
  const done = document.createElement('button');
  done.type = 'button';
  done.textContent = 'apply';
  const pending = document.createElement('ul');
  const constraints: Record<string, Json>[] = [];
  el.append(kind, featureA, featureB, millimeters, add, done, pending);
  el.addEventListener('submit', (event) => {
    event.preventDefault();
    const c: Record<string, Json> = {
      type: kind.value,
      featureA: featureA.value,
      featureB: featureB.value,
    };
    if (kind.value === 'Distance') c['millimeters'] = Number(millimeters.value);
    constraints.push(c);
    const li = document.createElement('li');
    li.textContent = `${kind.value}(${featureA.value}, ${featureB.value})`;
    pending.appendChild(li);
  });
  done.addEventListener('click', () => {
    if (constraints.length > 0) onSubmit({ kind: 'ConstraintSet', constraints });
  });
  return el;
}

function poseInputs(): { wrap: HTMLElement; read: () => Record<string, Json> } {
  const wrap = document.createElement('div');
  const fields = ['x', 'y', 'z'].map((axis) => {
    const field = input(axis, axis);
    field.value = '0';
    wrap.appendChild(field);
    return field;
  });
  return {
    wrap,
    read: () => ({
      position: fields.map((f) => Number(f.value)),
      orientation: [1, 0, 0, 0],
    }),
  };
}

function poseForm(onSubmit: Submit): HTMLElement {
  const el = document.createElement('form');
  el.className = 'touch-pose';
  const pose = poseInputs();
  const submit = document.createElement('button');
  submit.type = 'submit';
  submit.textContent = 'set pose';
  el.append(pose.wrap, submit);
  el.addEventListener('submit', (event) => {
    event.preventDefault();
    onSubmit({ kind: 'Pose6D', ...pose.read() });
  });
  return el;
}

function poseArrayForm(onSubmit: Submit): HTMLElement {
  const el = document.createElement('form');
  el.className = 'touch-pose-array';
  const poses: Record<string, Json>[] = [];
  const pose = poseInputs();
  const add = document.createElement('button');
  add.type = 'submit';
  add.textContent = 'add pose';
  const done = document.createElement('button');
  done.type = 'button';
  done.textContent = 'apply trajectory';
  const count = document.createElement('span');
  count.textContent = '0 poses';
  el.append(pose.wrap, add, done, count);
  el.addEventListener('submit', (event) => {
    event.preventDefault();
    poses.push(pose.read());
    count.textContent = `${poses.length} poses`;
  });
  done.addEventListener('click', () => {
    if (poses.length >= 2) onSubmit({ kind: 'PoseArray', poses });
  });
  return el;
}

function select(name: string, options: string[]): HTMLSelectElement {
  const el = document.createElement('select');
  el.name = name;
  for (const option of options) {
    const opt = document.createElement('option');
    opt.value = option;
    opt.textContent = option;
    el.appendChild(opt);
  }
  return el;
}

function input(name: string, placeholder: string): HTMLInputElement {
  const el = document.createElement('input');
  el.name = name;
  el.placeholder = placeholder;
  return el;
}
