// Application shell: wires the bridge to the page stack. Process overview →
// task detail → modality chooser → touch input, with the wizard console
// gated by ?wizard=1 and the execution monitor always available.

import { BridgeClient } from './bridge.js';
import { renderModalityChooser } from './chooser.js';
import { ExecutionMonitor } from './monitor.js';
import { Page, PageStack, renderStack } from './pages.js';
import type {
  Json,
  Modality,
  ParameterRequest,
  ProcessDescription,
  TaskDescription,
} from './protocol.js';
import { INPUT_TOPICS, TOPICS } from './protocol.js';
import { taskDetailPage } from './taskdetail.js';
import { DEFAULT_CATALOGS, TouchContext, buildTouchInput } from './touchinput.js';
import { WizardConsole } from './wizard.js';

export class App {
  readonly stack: PageStack;
  request: ParameterRequest | null = null;
  process: ProcessDescription | null = null;
  private context: TouchContext;

  constructor(
    private readonly bridge: BridgeClient,
    private readonly container: HTMLElement,
    options: { wizard?: boolean; maxWidth?: number; context?: Partial<TouchContext> } = {},
  ) {
    this.stack = new PageStack(options.maxWidth ?? 6);
    this.context = {
      models: options.context?.models ?? [],
      materials: options.context?.materials ?? [
        { material: 'steel', thickness_mm: 2.0 },
        { material: 'steel', thickness_mm: 4.0 },
        { material: 'aluminum', thickness_mm: 2.0 },
      ],
      catalogs: options.context?.catalogs ?? DEFAULT_CATALOGS,
      table: options.context?.table ?? { width: 1.2, depth: 0.8 },
    };
    this.stack.onChange(() => renderStack(this.stack, this.container));
    bridge.subscribe(TOPICS.parameterRequest, (msg) =>
      this.onRequest(msg as unknown as ParameterRequest),
    );
    const monitor = new ExecutionMonitor(bridge);
    document.getElementById('monitor')?.appendChild(monitor.element);
    if (options.wizard) {
      const wizard = new WizardConsole(bridge);
      document.getElementById('wizard')?.appendChild(wizard.element);
    }
  }

  async start(): Promise<void> {
    await this.bridge.connect();
    if (this.context.models.length === 0) {
      const response = await this.bridge.callService('engine.models');
      this.context.models = (response['models'] ?? []) as unknown as TouchContext['models'];
    }
    await this.refreshProcess();
    this.openOverview();
  }

  async refreshProcess(): Promise<void> {
    const described = await this.bridge.callService('engine.describe_process');
    this.process = described as unknown as ProcessDescription;
  }

  private onRequest(request: ParameterRequest): void {
    this.request = request;
    void this.refreshProcess().then(() => {
      const task = this.taskFor(request.instance);
      if (task) this.stack.replaceFrom(`task:${task.instance}`, this.taskPage(task));
    });
  }

  private taskFor(instance: string): TaskDescription | null {
    return this.process?.tasks.find((t) => t.instance === instance) ?? null;
  }

  openOverview(): void {
    if (!this.process) return;
    const overview: Page = {
      id: 'process',
      title: this.process.process,
      cards: [
        {
          title: 'Tasks',
          sections: [
            {
              kind: 'list',
              items: this.process.tasks.map((t) => ({
                id: t.instance,
                label: `${t.task} (${t.instance})`,
                onSelect: (id: string) => this.openTask(id),
              })),
            },
          ],
        },
      ],
      width: 2,
    };
    this.stack.open(overview);
  }

  openTask(instance: string): void {
    const task = this.taskFor(instance);
    if (task) this.stack.open(this.taskPage(task));
  }

  private taskPage(task: TaskDescription): Page {
    return taskDetailPage(task, this.request, (param) =>
      this.openChooser(task.instance, param),
    );
  }

  openChooser(instance: string, param: string): void {
    const request = this.request;
    if (!request || request.instance !== instance || request.param !== param) {
      return; // only the engine's currently requested parameter is editable
    }
    const chooser = renderModalityChooser(request, (modality) =>
      void this.choose(request, modality),
    );
    this.stack.open({
      id: `chooser:${instance}:${param}`,
      title: `Input for ${param}`,
      cards: [{ title: 'Choose input modality', sections: [{ kind: 'form', element: chooser }] }],
      width: 1,
    });
  }

  private async choose(request: ParameterRequest, modality: Modality): Promise<void> {
    await this.bridge.callService('engine.choose_modality', {
      instance: request.instance,
      param: request.param,
      modality,
    });
    if (modality === 'Touch') {
      this.openTouchInput(request);
    } else {
      this.stack.open({
        id: `waiting:${request.param}`,
        title: `${modality} active`,
        cards: [
          {
            title: 'Waiting for input',
            sections: [
              {
                kind: 'text',
                text: `perform the ${modality.toLowerCase()} input for ${request.param}`,
              },
            ],
          },
        ],
        width: 1,
      });
    }
  }

  openTouchInput(request: ParameterRequest): void {
    const activeModel = this.activeModelFor(request.instance);
    const element = buildTouchInput(
      request,
      { ...this.context, activeModel },
      (value) => this.submitTouch(request, value),
    );
    this.stack.open({
      id: `touch:${request.param}`,
      title: `Touch: ${request.param}`,
      cards: [{ title: request.prompt, sections: [{ kind: 'form', element }] }],
      width: 1,
    });
  }

  private activeModelFor(instance: string): string | undefined {
    const task = this.taskFor(instance);
    const objectParam = task?.params.find(
      (p) => p.dataType === 'ObjectModelRef' && p.set && p.value,
    );
    const id = objectParam?.value?.['id'];
    return typeof id === 'string' ? id : undefined;
  }

  private submitTouch(request: ParameterRequest, value: Record<string, Json>): void {
    this.bridge.publish(INPUT_TOPICS.Touch, { param: request.param, value });
    this.stack.closeFrom(`touch:${request.param}`);
  }
}

export function boot(): void {
  const url = new URL(window.location.href);
  const host = url.searchParams.get('bridge') ?? `ws://${url.hostname || '127.0.0.1'}:9090`;
  const wizard = url.searchParams.get('wizard') === '1';
  const container = document.getElementById('pages');
  if (!container) throw new Error('missing #pages container');
  const bridge = new BridgeClient(host);
  const app = new App(bridge, container, { wizard });
  void app.start();
}
