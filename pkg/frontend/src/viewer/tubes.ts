/** Triangle meshes for connection tubes along quadratic Bezier paths. */

import type { TubeSpec } from "./plan.js";
import { vadd, vcross, vlength, vnormalize, vscale, vsub, type Vec3 } from "./gfx.js";

const SEGMENTS = 10;
const SIDES = 7;

export interface TubeMesh {
  positions: Float32Array;
  normals: Float32Array;
  colors: Float32Array;
  indices: Uint32Array;
}

function bezier(p0: Vec3, p1: Vec3, p2: Vec3, t: number): Vec3 {
  const u = 1 - t;
  return [
    u * u * p0[0] + 2 * u * t * p1[0] + t * t * p2[0],
    u * u * p0[1] + 2 * u * t * p1[1] + t * t * p2[1],
    u * u * p0[2] + 2 * u * t * p1[2] + t * t * p2[2],
  ];
}

function bezierTangent(p0: Vec3, p1: Vec3, p2: Vec3, t: number): Vec3 {
  const u = 1 - t;
  return vnormalize([
    2 * u * (p1[0] - p0[0]) + 2 * t * (p2[0] - p1[0]),
    2 * u * (p1[1] - p0[1]) + 2 * t * (p2[1] - p1[1]),
    2 * u * (p1[2] - p0[2]) + 2 * t * (p2[2] - p1[2]),
  ]);
}

/** One shared mesh for all tubes of a view (vertex colors carry gradients). */
export function buildTubeMesh(tubes: TubeSpec[]): TubeMesh {
  const ringCount = SEGMENTS + 1;
  const vertsPerTube = ringCount * SIDES;
  const indicesPerTube = SEGMENTS * SIDES * 6;
  const positions = new Float32Array(tubes.length * vertsPerTube * 3);
  const normals = new Float32Array(tubes.length * vertsPerTube * 3);
  const colors = new Float32Array(tubes.length * vertsPerTube * 3);
  const indices = new Uint32Array(tubes.length * indicesPerTube);

  let vertexBase = 0;
  let indexBase = 0;
  for (const tube of tubes) {
    let reference: Vec3 = [0, 1, 0];
    const firstTangent = bezierTangent(tube.start, tube.control, tube.end, 0);
    if (Math.abs(firstTangent[1]) > 0.9) reference = [1, 0, 0];

    for (let s = 0; s <= SEGMENTS; s++) {
      const t = s / SEGMENTS;
      const center = bezier(tube.start, tube.control, tube.end, t);
      const tangent = bezierTangent(tube.start, tube.control, tube.end, t);
      let side = vcross(tangent, reference);
      if (vlength(side) < 1e-6) side = vcross(tangent, [1, 0, 0]);
      side = vnormalize(side);
      const up = vnormalize(vcross(side, tangent));
      reference = up; // parallel-transport-ish frame, avoids twisting
      const color: Vec3 = [
        tube.colorStart[0] + t * (tube.colorEnd[0] - tube.colorStart[0]),
        tube.colorStart[1] + t * (tube.colorEnd[1] - tube.colorStart[1]),
        tube.colorStart[2] + t * (tube.colorEnd[2] - tube.colorStart[2]),
      ];
      for (let k = 0; k < SIDES; k++) {
        const angle = (k / SIDES) * Math.PI * 2;
        const normal = vadd(vscale(side, Math.cos(angle)), vscale(up, Math.sin(angle)));
        const vertex = vadd(center, vscale(normal, tube.radius));
        const out = (vertexBase + s * SIDES + k) * 3;
        positions[out] = vertex[0];
        positions[out + 1] = vertex[1];
        positions[out + 2] = vertex[2];
        normals[out] = normal[0];
        normals[out + 1] = normal[1];
        normals[out + 2] = normal[2];
        colors[out] = color[0];
        colors[out + 1] = color[1];
        colors[out + 2] = color[2];
      }
    }
    for (let s = 0; s < SEGMENTS; s++) {
      for (let k = 0; k < SIDES; k++) {
        const a = vertexBase + s * SIDES + k;
        const b = vertexBase + s * SIDES + ((k + 1) % SIDES);
        const c = a + SIDES;
        const d = b + SIDES;
        indices[indexBase++] = a;
        indices[indexBase++] = c;
        indices[indexBase++] = b;
        indices[indexBase++] = b;
        indices[indexBase++] = c;
        indices[indexBase++] = d;
      }
    }
    vertexBase += vertsPerTube;
  }
  return { positions, normals, colors, indices };
}

export function tubeForDirection(from: Vec3, to: Vec3): Vec3 {
  return vnormalize(vsub(to, from));
}
