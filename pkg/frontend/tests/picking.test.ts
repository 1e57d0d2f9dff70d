import { describe, expect, it } from "vitest";

import type { Camera } from "../src/model";
import type { Positions } from "../src/payload";
import { clusterCentroids, pickCluster, pickRay } from "../src/viewer/picking";

function syntheticPositions(clusterCenters: Array<[number, number, number]>): Positions {
  const clusters = clusterCenters.length;
  const n = clusters * 10;
  const positions = new Float32Array(n * 3);
  const clusterId = new Uint32Array(n);
  const clusterSlot = new Uint32Array(n);
  const areaId = new Uint32Array(n);
  clusterCenters.forEach((center, c) => {
    for (let s = 0; s < 10; s++) {
      const i = c * 10 + s;
      positions[i * 3] = center[0] + (s % 3) * 0.1;
      positions[i * 3 + 1] = center[1] + ((s * 7) % 5) * 0.1;
      positions[i * 3 + 2] = center[2];
      clusterId[i] = c;
      clusterSlot[i] = s;
    }
  });
  return { neuron_count: n, positions, cluster_id: clusterId, cluster_slot: clusterSlot, area_id: areaId };
}

const camera: Camera = {
  position: [0, 0, 100],
  orientation: [0, 0, 0, 1], // identity: looking along -z
  target: [0, 0, 0],
};

describe("cluster picking", () => {
  const positions = syntheticPositions([
    [0, 0, 0],
    [30, 0, 0],
    [0, 25, 0],
  ]);
  const clusters = clusterCentroids(positions);

  it("averages cluster member positions", () => {
    expect(clusters.count).toBe(3);
    expect(clusters.centers[0]).toBeCloseTo(0.09, 5); // mean x offset of slots
    expect(clusters.centers[3]).toBeCloseTo(30.09, 4);
  });

  it("hits the cluster under the pointer", () => {
    const ray = pickRay(camera, 0, 0, Math.PI / 4, 1);
    expect(ray.direction[2]).toBeCloseTo(-1, 6);
    const hit = pickCluster(ray.origin, ray.direction, clusters);
    expect(hit).toBe(0);
  });

  it("misses empty space", () => {
    const ray = pickRay(camera, 0.9, -0.9, Math.PI / 4, 1);
    const hit = pickCluster(ray.origin, ray.direction, clusters);
    expect(hit).toBeNull();
  });

  it("prefers the nearest cluster along the ray", () => {
    const stacked = syntheticPositions([
      [0, 0, 0],
      [0, 0, 50], // closer to the camera, same screen position
    ]);
    const both = clusterCentroids(stacked);
    const ray = pickRay(camera, 0, 0, Math.PI / 4, 1);
    expect(pickCluster(ray.origin, ray.direction, both)).toBe(1);
  });

  it("ignores clusters behind the camera", () => {
    const behind = clusterCentroids(syntheticPositions([[0, 0, 200]]));
    const ray = pickRay(camera, 0, 0, Math.PI / 4, 1);
    expect(pickCluster(ray.origin, ray.direction, behind)).toBeNull();
  });
});
