/** Shared client-side types mirroring the server's catalog and session state. */

export const NEURON_PROPERTIES = [
  "area",
  "calcium",
  "calcium_target_delta",
  "fired",
  "fired_fraction",
  "grown_axons",
  "grown_dendrites",
  "synapses_out",
  "synapses_in",
] as const;

export type NeuronProperty = (typeof NEURON_PROPERTIES)[number];

/** Frame columns in payload order (area is static, not a column). */
export const FRAME_COLUMNS = [
  "calcium",
  "calcium_target_delta",
  "fired",
  "fired_fraction",
  "grown_axons",
  "grown_dendrites",
  "synapses_in",
  "synapses_out",
] as const;

export type FrameColumn = (typeof FRAME_COLUMNS)[number];

export const PROPERTY_LABELS: Record<NeuronProperty, string> = {
  area: "area",
  calcium: "calcium",
  calcium_target_delta: "calcium target delta",
  fired: "fired",
  fired_fraction: "fired rate",
  grown_axons: "axons",
  grown_dendrites: "dendrites",
  synapses_out: "synapses out",
  synapses_in: "synapses in",
};

export interface PropertyRange {
  min: number;
  max: number;
}

export interface ScenarioInfo {
  id: string;
  name: string;
}

export interface Catalog {
  neuron_count: number;
  area_table: string[];
  scenarios: ScenarioInfo[];
  timesteps: Record<string, number[]>;
  global_ranges: Record<string, Record<string, PropertyRange>>;
}

export interface Camera {
  position: [number, number, number];
  orientation: [number, number, number, number];
  target: [number, number, number];
}

export type Visibility = "neurons" | "connections" | "both";
export type DisplayMode = "dynamic_radius" | "displaced";
export type RangeMode = "global" | "local";

export interface DiffSource {
  scenario_id: string;
  timestep: number;
}

export interface ViewState {
  scenario_id: string;
  timestep: number;
  visibility: Visibility;
  display_mode: DisplayMode;
  color_property: NeuronProperty;
  range_mode: RangeMode;
  diff: DiffSource | null;
  near_clip: number;
  camera: Camera;
}

export interface SessionState {
  view_count: number;
  views: ViewState[];
  sync_cameras: boolean;
  chart_source_view: number;
}

export interface HistogramStats {
  property: string;
  range: PropertyRange;
  bin_count: number;
  counts: number[];
}

export interface BoxStats {
  area_id: number;
  area_name?: string;
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
  whisker_low: number;
  whisker_high: number;
  outliers: number[];
}

export interface ParallelCoords {
  axes: string[];
  rows: number[][];
  stride: number;
}

export interface StatsResponse {
  scenario_id: string;
  timestep: number;
  property: string;
  range_mode: RangeMode;
  range: PropertyRange;
  histogram: HistogramStats;
  box_stats: BoxStats[];
  parallel_coords: ParallelCoords;
}

/** Canonical JSON: stable key order, compact separators (matches the server). */
export function canonicalJson(value: unknown): string {
  const order = (v: unknown): unknown => {
    if (Array.isArray(v)) return v.map(order);
    if (v !== null && typeof v === "object") {
      const out: Record<string, unknown> = {};
      for (const key of Object.keys(v as Record<string, unknown>).sort()) {
        out[key] = order((v as Record<string, unknown>)[key]);
      }
      return out;
    }
    return v;
  };
  return JSON.stringify(order(value));
}
