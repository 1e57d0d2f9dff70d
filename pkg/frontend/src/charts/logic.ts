/** Chart-page logic kept free of DOM so the session-following and brushing
 * rules are unit-testable. Chart data always comes from /api/stats; nothing
 * is recomputed client-side from raw columns.
 */

import type { SessionState, StatsResponse } from "../model.js";

export interface StatsKey {
  scenario_id: string;
  timestep: number;
  property: string;
  range_mode: string;
}

/** The tuple whose change requires a stats refetch. */
export function statsKeyFor(state: SessionState): StatsKey {
  const view = state.views[state.chart_source_view];
  return {
    scenario_id: view.scenario_id,
    timestep: view.timestep,
    property: view.color_property,
    range_mode: view.range_mode,
  };
}

export function sameKey(a: StatsKey | null, b: StatsKey): boolean {
  return (
    a !== null &&
    a.scenario_id === b.scenario_id &&
    a.timestep === b.timestep &&
    a.property === b.property &&
    a.range_mode === b.range_mode
  );
}

/** Follows the session's chart_source_view and refetches stats exactly once
 * per relevant change; camera motion and other irrelevant updates are
 * ignored. At most one fetch is in flight; the latest key wins. */
export class ChartFollower {
  private lastKey: StatsKey | null = null;
  private inFlight = false;
  private queued: StatsKey | null = null;
  fetchCount = 0;

  constructor(
    private fetchStats: (key: StatsKey) => Promise<StatsResponse>,
    private onStats: (stats: StatsResponse) => void,
    private onError: (error: unknown) => void = () => {},
  ) {}

  /** Feed every folded session state through here. */
  onState(state: SessionState): void {
    const key = statsKeyFor(state);
    if (sameKey(this.lastKey, key)) return;
    this.lastKey = key;
    this.request(key);
  }

  private request(key: StatsKey): void {
    if (this.inFlight) {
      this.queued = key;
      return;
    }
    this.inFlight = true;
    this.fetchCount += 1;
    this.fetchStats(key)
      .then((stats) => this.onStats(stats))
      .catch((error) => this.onError(error))
      .finally(() => {
        this.inFlight = false;
        const next = this.queued;
        this.queued = null;
        if (next) this.request(next);
      });
  }
}

export interface Brush {
  axis: number;
  low: number;
  high: number;
}

/** Rows passing every active brush; filtering is local-only. */
export function activeRows(rows: number[][], brushes: Brush[]): boolean[] {
  return rows.map((row) =>
    brushes.every((brush) => row[brush.axis] >= brush.low && row[brush.axis] <= brush.high),
  );
}

/** Charts stack vertically below this viewport width (logical pixels). */
export const STACK_THRESHOLD = 900;

export function chartsStacked(viewportWidth: number): boolean {
  return viewportWidth < STACK_THRESHOLD;
}

/** Parallel-coordinates axis labels, in display order. */
export const PARALLEL_AXIS_LABELS = ["area", "calcium", "fired rate", "axons", "dendrites"];
