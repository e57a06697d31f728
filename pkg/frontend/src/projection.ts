// 2D orthographic projection of object models for vertex/edge picking.
// Replaces a full 3D editor: parameters reference ids, so a flat projection
// with hit-testing is enough to select them.

export interface ModelDoc {
  id: string;
  vertices: Record<string, [number, number, number]>;
  edges: Record<string, [string, string]>;
  height: number;
}

export type Plane = 'xy' | 'xz' | 'yz';

export interface Projected {
  vertices: Record<string, [number, number]>;
  edges: Record<string, [[number, number], [number, number]]>;
}

const AXES: Record<Plane, [number, number]> = { xy: [0, 1], xz: [0, 2], yz: [1, 2] };

/** Pick the projection plane with the largest spread of vertex positions. */
export function bestPlane(model: ModelDoc): Plane {
  const coords = Object.values(model.vertices);
  if (coords.length === 0) return 'xy';
  const spread = (axis: number) => {
    const values = coords.map((v) => v[axis] ?? 0);
    return Math.max(...values) - Math.min(...values);
  };
  const spreads: [Plane, number][] = [
    ['xy', spread(0) + spread(1)],
    ['xz', spread(0) + spread(2)],
    ['yz', spread(1) + spread(2)],
  ];
  spreads.sort((a, b) => b[1] - a[1]);
  return spreads[0]![0];
}

export function project(model: ModelDoc, plane: Plane = 'xy'): Projected {
  const [a, b] = AXES[plane];
  const vertices: Projected['vertices'] = {};
  for (const [id, v] of Object.entries(model.vertices)) {
    vertices[id] = [v[a] ?? 0, v[b] ?? 0];
  }
  const edges: Projected['edges'] = {};
  for (const [id, [va, vb]] of Object.entries(model.edges)) {
    const pa = vertices[va];
    const pb = vertices[vb];
    if (pa && pb) edges[id] = [pa, pb];
  }
  return { vertices, edges };
}

function dist(a: [number, number], b: [number, number]): number {
  return Math.hypot(a[0] - b[0], a[1] - b[1]);
}

function pointSegmentDistance(
  p: [number, number],
  a: [number, number],
  b: [number, number],
): number {
  const abx = b[0] - a[0];
  const aby = b[1] - a[1];
  const lengthSq = abx * abx + aby * aby;
  if (lengthSq === 0) return dist(p, a);
  let t = ((p[0] - a[0]) * abx + (p[1] - a[1]) * aby) / lengthSq;
  t = Math.max(0, Math.min(1, t));
  return dist(p, [a[0] + t * abx, a[1] + t * aby]);
}

export function hitTestVertex(
  projected: Projected,
  point: [number, number],
  tolerance: number,
): string | null {
  let best: string | null = null;
  let bestDist = tolerance;
  for (const [id, v] of Object.entries(projected.vertices)) {
    const d = dist(point, v);
    if (d <= bestDist) {
      best = id;
      bestDist = d;
    }
  }
  return best;
}

export function hitTestEdge(
  projected: Projected,
  point: [number, number],
  tolerance: number,
): string | null {
  let best: string | null = null;
  let bestDist = tolerance;
  for (const [id, [a, b]] of Object.entries(projected.edges)) {
    const d = pointSegmentDistance(point, a, b);
    if (d <= bestDist) {
      best = id;
      bestDist = d;
    }
  }
  return best;
}

/** Map a click inside the table rectangle to table-frame coordinates
 * (origin at the rectangle center, y up). */
export function tableClickToLocation(
  clickX: number,
  clickY: number,
  rect: { width: number; height: number },
  tableSize: { width: number; depth: number },
): { x: number; y: number; z: number } {
  const x = (clickX / rect.width - 0.5) * tableSize.width;
  const y = (0.5 - clickY / rect.height) * tableSize.depth;
  return { x: round6(x), y: round6(y), z: 0 };
}

function round6(v: number): number {
  return Math.round(v * 1e6) / 1e6;
}
