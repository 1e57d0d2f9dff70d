/** Ctrl+click cluster selection: ray versus cluster bounding spheres. */

import { sphereRadius } from "../encodings.js";
import type { Camera } from "../model.js";
import type { Positions } from "../payload.js";
import { qRotate, vadd, vdot, vscale, vsub, vnormalize, vlength, type Vec3 } from "./gfx.js";

export interface ClusterCentroids {
  centers: Float32Array; // xyz per cluster
  count: number;
}

export function clusterCentroids(positions: Positions): ClusterCentroids {
  const clusters = positions.neuron_count / 10;
  const centers = new Float32Array(clusters * 3);
  for (let c = 0; c < clusters; c++) {
    let x = 0;
    let y = 0;
    let z = 0;
    for (let s = 0; s < 10; s++) {
      const i = c * 10 + s;
      x += positions.positions[i * 3];
      y += positions.positions[i * 3 + 1];
      z += positions.positions[i * 3 + 2];
    }
    centers[c * 3] = x / 10;
    centers[c * 3 + 1] = y / 10;
    centers[c * 3 + 2] = z / 10;
  }
  return { centers, count: clusters };
}

export function pickRay(
  camera: Camera,
  ndcX: number,
  ndcY: number,
  fovY: number,
  aspect: number,
): { origin: Vec3; direction: Vec3 } {
  const tan = Math.tan(fovY / 2);
  const right = qRotate(camera.orientation, [1, 0, 0]);
  const up = qRotate(camera.orientation, [0, 1, 0]);
  const forward = qRotate(camera.orientation, [0, 0, -1]);
  const direction = vnormalize(
    vadd(vadd(vscale(right, ndcX * tan * aspect), vscale(up, ndcY * tan)), forward),
  );
  return { origin: camera.position as Vec3, direction };
}

/** Nearest cluster whose bounding sphere the ray hits, or null.
 *
 * The bounding radius tracks the dynamic sphere radius at that distance
 * plus the cluster jitter, so what looks clickable is clickable.
 */
export function pickCluster(
  origin: Vec3,
  direction: Vec3,
  clusters: ClusterCentroids,
  jitterSlack = 0.8,
): number | null {
  let best = -1;
  let bestAlong = Infinity;
  for (let c = 0; c < clusters.count; c++) {
    const center: Vec3 = [
      clusters.centers[c * 3],
      clusters.centers[c * 3 + 1],
      clusters.centers[c * 3 + 2],
    ];
    const toCenter = vsub(center, origin);
    const along = vdot(toCenter, direction);
    if (along <= 0) continue;
    const closest = vsub(toCenter, vscale(direction, along));
    const radius = sphereRadius(along) + jitterSlack;
    if (vlength(closest) <= radius && along < bestAlong) {
      best = c;
      bestAlong = along;
    }
  }
  return best >= 0 ? best : null;
}
