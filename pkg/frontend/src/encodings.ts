/** Visual encoding functions: sphere sizing, cluster displacement, tube
 * shape/color, view layout capacity, and the two color maps. Pure math so
 * every rule is unit-testable away from the GPU.
 */

export type Vec3 = [number, number, number];

export const SPHERE_RADIUS_SLOPE = 0.02; // radius grows with camera distance
export const SPHERE_RADIUS_MIN = 0.4; // mm
export const SPHERE_RADIUS_MAX = 3.0; // mm

/** Per-slot spacing of displaced cluster spheres: two minimum radii. */
export const DISPLACEMENT_STEP = 2 * SPHERE_RADIUS_MIN;

export const TUBE_BOW = 0.3; // control-point pull toward the brain centroid
export const TUBE_RADIUS_MAX = 2.5; // mm, for the busiest area pair

export const VIEW_CELL_WIDTH = 960; // logical pixels per view column
export const VIEW_CELL_HEIGHT = 720; // logical pixels per view row
export const MAX_VIEW_COUNT = 8;

export const NEAR_CLIP_MIN = 0.1; // mm, slider extent
export const NEAR_CLIP_MAX = 200; // mm

/** Dynamic sphere radius from camera distance: clamp(slope * d, min, max). */
export function sphereRadius(distance: number): number {
  const r = SPHERE_RADIUS_SLOPE * distance;
  return Math.min(Math.max(r, SPHERE_RADIUS_MIN), SPHERE_RADIUS_MAX);
}

/** Slide a neuron toward the brain centroid by its cluster slot.
 *
 * Slot 0 stays put; the ten spheres of a cluster end up collinear along
 * the direction to the centroid. A neuron sitting exactly on the centroid
 * has no direction and is returned unchanged.
 */
export function displacedPosition(position: Vec3, slot: number, centroid: Vec3): Vec3 {
  const dx = centroid[0] - position[0];
  const dy = centroid[1] - position[1];
  const dz = centroid[2] - position[2];
  const length = Math.hypot(dx, dy, dz);
  if (length === 0) return [...position];
  const scale = (slot * DISPLACEMENT_STEP) / length;
  return [position[0] + dx * scale, position[1] + dy * scale, position[2] + dz * scale];
}

export type TubeColorAxis = "red" | "green" | "blue";

/** Dominant connection direction: red left/right, green back/front, blue bottom/top. */
export function tubeColorAxis(from: Vec3, to: Vec3): TubeColorAxis {
  const dx = Math.abs(to[0] - from[0]);
  const dy = Math.abs(to[1] - from[1]);
  const dz = Math.abs(to[2] - from[2]);
  if (dx >= dy && dx >= dz) return "red";
  if (dy >= dz) return "green";
  return "blue";
}

export const TUBE_AXIS_RGB: Record<TubeColorAxis, Vec3> = {
  red: [0.9, 0.12, 0.12],
  green: [0.1, 0.75, 0.2],
  blue: [0.15, 0.3, 0.95],
};

/** Tube radius scales with the square root of relative connection count. */
export function tubeRadius(count: number, maxCount: number, radiusMax = TUBE_RADIUS_MAX): number {
  if (maxCount <= 0 || count <= 0) return 0;
  return radiusMax * Math.sqrt(count / maxCount);
}

export interface TubeGeometry {
  start: Vec3;
  control: Vec3;
  end: Vec3;
  radius: number;
  axis: TubeColorAxis;
  /** Gradient runs white at the source end to the full axis color at the target. */
  colorStart: Vec3;
  colorEnd: Vec3;
}

/** Quadratic Bezier tube between two area centroids, bowed toward the brain
 * centroid so connections stay on the interior. Self-loops are not drawn. */
export function tubeGeometry(
  from: Vec3,
  to: Vec3,
  brainCentroid: Vec3,
  count: number,
  maxCount: number,
): TubeGeometry | null {
  if (from[0] === to[0] && from[1] === to[1] && from[2] === to[2]) return null;
  if (count < 1) return null;
  const mid: Vec3 = [(from[0] + to[0]) / 2, (from[1] + to[1]) / 2, (from[2] + to[2]) / 2];
  const control: Vec3 = [
    mid[0] + TUBE_BOW * (brainCentroid[0] - mid[0]),
    mid[1] + TUBE_BOW * (brainCentroid[1] - mid[1]),
    mid[2] + TUBE_BOW * (brainCentroid[2] - mid[2]),
  ];
  const axis = tubeColorAxis(from, to);
  return {
    start: from,
    control,
    end: to,
    radius: tubeRadius(count, maxCount),
    axis,
    colorStart: [1, 1, 1],
    colorEnd: TUBE_AXIS_RGB[axis],
  };
}

/** Diff tubes: radius from |delta|, orange when gained, purple when lost. */
export const DIFF_GAINED_RGB: Vec3 = [1.0, 0.55, 0.1];
export const DIFF_LOST_RGB: Vec3 = [0.55, 0.2, 0.75];

export function diffTubeColor(delta: number): Vec3 {
  return delta >= 0 ? [...DIFF_GAINED_RGB] : [...DIFF_LOST_RGB];
}

export interface ViewLayout {
  capacity: number;
  rows: number;
  columns: number;
}

/** Grid shape for a given number of rendered views. */
export function gridFor(viewCount: number): { rows: number; columns: number } {
  if (viewCount <= 1) return { rows: 1, columns: 1 };
  if (viewCount === 2) return { rows: 1, columns: 2 };
  if (viewCount <= 4) return { rows: 2, columns: 2 };
  if (viewCount <= 6) return { rows: 2, columns: 3 };
  return { rows: 2, columns: 4 };
}

/** How many views a display can host, from its logical-pixel size. */
export function layoutViews(width: number, height: number): ViewLayout {
  const cells = Math.floor(width / VIEW_CELL_WIDTH) * Math.floor(height / VIEW_CELL_HEIGHT);
  const capacity = Math.min(Math.max(cells, 1), MAX_VIEW_COUNT);
  return { capacity, ...gridFor(capacity) };
}

// -- color maps

const SEQUENTIAL_STOPS: Vec3[] = [
  [0.267, 0.005, 0.329],
  [0.283, 0.141, 0.458],
  [0.254, 0.265, 0.53],
  [0.207, 0.372, 0.553],
  [0.164, 0.471, 0.558],
  [0.128, 0.567, 0.551],
  [0.135, 0.659, 0.518],
  [0.267, 0.749, 0.441],
  [0.478, 0.821, 0.318],
  [0.741, 0.873, 0.15],
  [0.993, 0.906, 0.144],
];

/** Sequential map for raw values on [0, 1]. */
export function sequentialColor(t: number): Vec3 {
  const x = Math.min(Math.max(t, 0), 1) * (SEQUENTIAL_STOPS.length - 1);
  const i = Math.min(Math.floor(x), SEQUENTIAL_STOPS.length - 2);
  const f = x - i;
  const a = SEQUENTIAL_STOPS[i];
  const b = SEQUENTIAL_STOPS[i + 1];
  return [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]), a[2] + f * (b[2] - a[2])];
}

const DIVERGING_LOW: Vec3 = [0.15, 0.15, 0.85]; // decreased
const DIVERGING_HIGH: Vec3 = [0.85, 0.15, 0.15]; // increased; hue mirror of LOW

/** Diverging blue-white-red map for diffs: 0.5 is exactly white and
 * color(0.5 - x) is the channel mirror of color(0.5 + x). */
export function divergingColor(t: number): Vec3 {
  const x = Math.min(Math.max(t, 0), 1);
  if (x < 0.5) {
    const f = 1 - x * 2;
    return [
      1 + f * (DIVERGING_LOW[0] - 1),
      1 + f * (DIVERGING_LOW[1] - 1),
      1 + f * (DIVERGING_LOW[2] - 1),
    ];
  }
  const f = (x - 0.5) * 2;
  return [
    1 + f * (DIVERGING_HIGH[0] - 1),
    1 + f * (DIVERGING_HIGH[1] - 1),
    1 + f * (DIVERGING_HIGH[2] - 1),
  ];
}

/** Normalize a value into [0, 1] against a range; degenerate ranges map to 0.5. */
export function normalizeValue(value: number, min: number, max: number): number {
  if (!(max > min)) return 0.5;
  return Math.min(Math.max((value - min) / (max - min), 0), 1);
}
