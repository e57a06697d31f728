// Wire types for the taskcell bridge protocol (one JSON object per frame).

export type Json = string | number | boolean | null | Json[] | { [key: string]: Json };

export interface BridgeFrame {
  op: 'subscribe' | 'unsubscribe' | 'publish' | 'call_service' | 'service_response' | 'status';
  topic?: string;
  service?: string;
  id?: string;
  // publish payloads are objects; status frames carry a string code here
  msg?: Record<string, Json> | string;
  args?: Record<string, Json>;
  result?: Record<string, Json>;
  error?: { code: string; message: string };
  level?: string;
}

export type Modality = 'Touch' | 'Gesture' | 'Speech' | 'Pen' | 'KeyboardMouse';

export type DataKind =
  | 'ObjectModelRef'
  | 'Location3D'
  | 'Pose6D'
  | 'PoseArray'
  | 'VertexRef'
  | 'EdgeRef'
  | 'Number'
  | 'ListSelection'
  | 'ConstraintSet'
  | 'MaterialRef';

export interface ParameterRequest {
  session: string;
  instance: string;
  param: string;
  dataType: DataKind;
  modalities: Modality[];
  prompt: string;
  unit?: string;
  catalog?: string;
}

export interface ParamState {
  name: string;
  dataType: DataKind;
  unit: string | null;
  catalog: string | null;
  required: boolean;
  set: boolean;
  value: Record<string, Json> | null;
}

export interface TaskDescription {
  instance: string;
  task: string;
  domain: string;
  requiredSkills: string[];
  params: ParamState[];
}

export interface ProcessDescription {
  process: string;
  tasks: TaskDescription[];
}

export interface EngineStateMsg {
  type: 'phase' | 'error';
  phase?: string;
  unset?: number;
  ready?: boolean;
  blocked?: boolean;
  code?: string;
  message?: string;
  channel?: string;
}

export interface TraceEvent {
  seq: number;
  skill: string;
  args: Record<string, Json>;
  outcome: string;
  deltas: Record<string, Json>;
}

export const TOPICS = {
  parameterRequest: '/engine/parameter_request',
  state: '/engine/state',
  trace: '/engine/trace',
  confirm: '/engine/confirm',
} as const;

export const INPUT_TOPICS: Record<Exclude<Modality, 'KeyboardMouse'>, string> = {
  Touch: '/input/touch',
  Gesture: '/input/gesture',
  Speech: '/input/speech',
  Pen: '/input/pen',
};

export const WIZARD_MODALITIES: Modality[] = ['Gesture', 'Speech', 'Pen'];
