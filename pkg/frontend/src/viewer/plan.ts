/** Pure per-view draw planning: what to draw and how to color it, computed
 * away from the GPU so the visibility and color-scale rules are testable.
 */

import {
  diffTubeColor,
  normalizeValue,
  tubeGeometry,
  tubeRadius,
  type TubeGeometry,
  type Vec3,
} from "../encodings.js";
import type { Catalog, ViewState } from "../model.js";
import { propertyColumn, type DecodedDiff, type DecodedFrame, type Positions } from "../payload.js";

export interface ColorScale {
  min: number;
  max: number;
  diverging: boolean;
}

export interface TubeSpec extends TubeGeometry {
  srcArea: number;
  dstArea: number;
}

export interface ViewDrawPlan {
  /** Instances the sphere pass draws; 0 when neurons are hidden. */
  sphereInstanceCount: number;
  /** Normalized [0,1] color coordinate per neuron (empty when hidden). */
  colorT: Float32Array;
  colorScale: ColorScale;
  tubes: TubeSpec[];
}

export interface StaticGeometry {
  positions: Positions;
  areaCentroids: Vec3[];
  brainCentroid: Vec3;
}

export function buildStaticGeometry(positions: Positions): StaticGeometry {
  const n = positions.neuron_count;
  const centroid: Vec3 = [0, 0, 0];
  const areaCount = positions.area_id.length
    ? positions.area_id.reduce((m, v) => Math.max(m, v), 0) + 1
    : 0;
  const sums = new Float64Array(areaCount * 3);
  const counts = new Uint32Array(areaCount);
  for (let i = 0; i < n; i++) {
    const x = positions.positions[i * 3];
    const y = positions.positions[i * 3 + 1];
    const z = positions.positions[i * 3 + 2];
    centroid[0] += x;
    centroid[1] += y;
    centroid[2] += z;
    const area = positions.area_id[i];
    sums[area * 3] += x;
    sums[area * 3 + 1] += y;
    sums[area * 3 + 2] += z;
    counts[area] += 1;
  }
  if (n > 0) {
    centroid[0] /= n;
    centroid[1] /= n;
    centroid[2] /= n;
  }
  const areaCentroids: Vec3[] = [];
  for (let a = 0; a < areaCount; a++) {
    const c = counts[a] || 1;
    areaCentroids.push([sums[a * 3] / c, sums[a * 3 + 1] / c, sums[a * 3 + 2] / c]);
  }
  return { positions, areaCentroids, brainCentroid: centroid };
}

function resolveRawScale(
  view: ViewState,
  frame: DecodedFrame,
  catalog: Catalog,
  positions: Positions,
): ColorScale {
  const property = view.color_property;
  if (property === "area") {
    return { min: 0, max: Math.max(catalog.area_table.length - 1, 0), diverging: false };
  }
  if (view.range_mode === "global") {
    const range = catalog.global_ranges[view.scenario_id]?.[property];
    if (range) return { min: range.min, max: range.max, diverging: false };
  }
  const column = propertyColumn(frame, property, positions.area_id);
  let min = Infinity;
  let max = -Infinity;
  for (let i = 0; i < column.length; i++) {
    const v = Number(column[i]);
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (!Number.isFinite(min)) {
    min = 0;
    max = 0;
  }
  return { min, max, diverging: false };
}

/** Diff colors always use a symmetric local scale so zero stays white. */
function resolveDiffScale(diff: DecodedDiff, property: string, areaIds: Uint32Array): ColorScale {
  if (property === "area") return { min: -1, max: 1, diverging: true }; // area never changes
  const column = diff.columns[property];
  let m = 0;
  if (column) {
    for (let i = 0; i < column.length; i++) m = Math.max(m, Math.abs(Number(column[i])));
  }
  void areaIds;
  return { min: -m, max: m, diverging: true };
}

function rawTubes(frame: DecodedFrame, statics: StaticGeometry): TubeSpec[] {
  const a = frame.area_count;
  let maxCount = 0;
  for (const v of frame.connectivity) maxCount = Math.max(maxCount, v);
  const tubes: TubeSpec[] = [];
  for (let s = 0; s < a; s++) {
    for (let t = 0; t < a; t++) {
      const count = frame.connectivity[s * a + t];
      if (count <= 0 || s === t) continue; // self-loops are not drawn
      const geometry = tubeGeometry(
        statics.areaCentroids[s],
        statics.areaCentroids[t],
        statics.brainCentroid,
        count,
        maxCount,
      );
      if (geometry) tubes.push({ ...geometry, srcArea: s, dstArea: t });
    }
  }
  return tubes;
}

/** Diff tubes: radius from |delta|, orange for gained, purple for lost. */
function diffTubes(diff: DecodedDiff, statics: StaticGeometry): TubeSpec[] {
  const a = diff.area_count;
  let maxAbs = 0;
  for (const v of diff.connectivity) maxAbs = Math.max(maxAbs, Math.abs(v));
  const tubes: TubeSpec[] = [];
  for (let s = 0; s < a; s++) {
    for (let t = 0; t < a; t++) {
      const delta = diff.connectivity[s * a + t];
      if (delta === 0 || s === t) continue;
      const geometry = tubeGeometry(
        statics.areaCentroids[s],
        statics.areaCentroids[t],
        statics.brainCentroid,
        Math.abs(delta),
        maxAbs,
      );
      if (!geometry) continue;
      const rgb = diffTubeColor(delta);
      tubes.push({
        ...geometry,
        radius: tubeRadius(Math.abs(delta), maxAbs),
        colorStart: rgb,
        colorEnd: rgb,
        srcArea: s,
        dstArea: t,
      });
    }
  }
  return tubes;
}

export function buildDrawPlan(
  view: ViewState,
  frame: DecodedFrame,
  diff: DecodedDiff | null,
  catalog: Catalog,
  statics: StaticGeometry,
): ViewDrawPlan {
  const showNeurons = view.visibility === "neurons" || view.visibility === "both";
  const showConnections = view.visibility === "connections" || view.visibility === "both";
  const n = frame.neuron_count;
  const areaIds = statics.positions.area_id;

  let colorScale: ColorScale;
  let colorT = new Float32Array(0);
  if (diff !== null) {
    colorScale = resolveDiffScale(diff, view.color_property, areaIds);
  } else {
    colorScale = resolveRawScale(view, frame, catalog, statics.positions);
  }
  if (showNeurons) {
    colorT = new Float32Array(n);
    const source =
      diff !== null
        ? view.color_property === "area"
          ? null
          : diff.columns[view.color_property]
        : propertyColumn(frame, view.color_property, areaIds);
    for (let i = 0; i < n; i++) {
      const value = source ? Number(source[i]) : 0;
      colorT[i] = normalizeValue(value, colorScale.min, colorScale.max);
    }
  }

  let tubes: TubeSpec[] = [];
  if (showConnections) {
    tubes = diff !== null ? diffTubes(diff, statics) : rawTubes(frame, statics);
  }

  return {
    sphereInstanceCount: showNeurons ? n : 0,
    colorT,
    colorScale,
    tubes,
  };
}
