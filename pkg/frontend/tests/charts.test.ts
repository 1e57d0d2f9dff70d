import { describe, expect, it } from "vitest";

import type { StatsResponse } from "../src/model";
import { applyUpdate, defaultSessionState } from "../src/state";
import {
  ChartFollower,
  PARALLEL_AXIS_LABELS,
  activeRows,
  chartsStacked,
  statsKeyFor,
} from "../src/charts/logic";

function statsStub(): StatsResponse {
  return {
    scenario_id: "learning",
    timestep: 0,
    property: "calcium",
    range_mode: "global",
    range: { min: 0, max: 1 },
    histogram: { property: "calcium", range: { min: 0, max: 1 }, bin_count: 2, counts: [1, 2] },
    box_stats: [],
    parallel_coords: { axes: [], rows: [], stride: 1 },
  };
}

async function settle(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
}

describe("chart session following", () => {
  it("has exactly the five documented axis labels", () => {
    expect(PARALLEL_AXIS_LABELS).toEqual(["area", "calcium", "fired rate", "axons", "dendrites"]);
  });

  it("fetches once per relevant change and ignores camera motion", async () => {
    const follower = new ChartFollower(async () => statsStub(), () => {});
    let state = defaultSessionState();
    follower.onState(state);
    await settle();
    expect(follower.fetchCount).toBe(1);

    // camera churn at high rate: zero extra fetches
    for (let i = 0; i < 30; i++) {
      state = applyUpdate(state, "views.0.camera", {
        position: [i, 0, 0],
        orientation: [0, 0, 0, 1],
        target: [0, 0, 0],
      });
      follower.onState(state);
    }
    await settle();
    expect(follower.fetchCount).toBe(1);

    state = applyUpdate(state, "views.0.timestep", 3);
    follower.onState(state);
    await settle();
    expect(follower.fetchCount).toBe(2);

    // same key again: no fetch
    follower.onState(state);
    await settle();
    expect(follower.fetchCount).toBe(2);

    state = applyUpdate(state, "views.0.color_property", "synapses_in");
    follower.onState(state);
    await settle();
    expect(follower.fetchCount).toBe(3);

    state = applyUpdate(state, "views.0.range_mode", "local");
    follower.onState(state);
    await settle();
    expect(follower.fetchCount).toBe(4);
  });

  it("follows the designated chart source view only", () => {
    let state = defaultSessionState();
    state = applyUpdate(state, "view_count", 2);
    state = applyUpdate(state, "views.1.timestep", 9);
    state = applyUpdate(state, "views.1.color_property", "fired");
    expect(statsKeyFor(state).timestep).toBe(0); // still following view 0
    state = applyUpdate(state, "chart_source_view", 1);
    const key = statsKeyFor(state);
    expect(key.timestep).toBe(9);
    expect(key.property).toBe("fired");
  });

  it("keeps at most one fetch in flight, latest wins", async () => {
    const seen: number[] = [];
    let release: (() => void) | null = null;
    const follower = new ChartFollower(
      (key) =>
        new Promise((resolve) => {
          seen.push(key.timestep);
          release = () => resolve({ ...statsStub(), timestep: key.timestep });
        }),
      () => {},
    );
    let state = defaultSessionState();
    follower.onState(state);
    for (const t of [1, 2, 3]) {
      state = applyUpdate(state, "views.0.timestep", t);
      follower.onState(state);
    }
    expect(seen).toEqual([0]); // the rest are queued, not raced
    release!();
    await settle();
    await settle();
    expect(seen).toEqual([0, 3]); // only the newest queued key ran
  });

  it("reports fetch failures without breaking the loop", async () => {
    const errors: unknown[] = [];
    let fail = true;
    const follower = new ChartFollower(
      async () => {
        if (fail) throw new Error("boom");
        return statsStub();
      },
      () => {},
      (error) => errors.push(error),
    );
    const state = defaultSessionState();
    follower.onState(state);
    await settle();
    expect(errors).toHaveLength(1);
    fail = false;
    follower.onState(applyUpdate(state, "views.0.timestep", 2));
    await settle();
    expect(follower.fetchCount).toBe(2);
  });
});

describe("parallel coordinates brushing", () => {
  const rows = [
    [0, 0.1, 0.5, 1, 2],
    [1, 0.4, 0.2, 3, 1],
    [0, 0.9, 0.8, 2, 4],
    [1, 0.6, 0.1, 5, 0],
  ];

  it("keeps everything with a full-extent brush", () => {
    const active = activeRows(rows, [{ axis: 1, low: 0.1, high: 0.9 }]);
    expect(active).toEqual([true, true, true, true]);
  });

  it("drops everything with an empty interval", () => {
    const active = activeRows(rows, [{ axis: 1, low: 0.95, high: 0.99 }]);
    expect(active).toEqual([false, false, false, false]);
  });

  it("counts rows in range like a direct filter", () => {
    const brush = { axis: 1, low: 0.4, high: 0.9 };
    const active = activeRows(rows, [brush]);
    const oracle = rows.map((row) => row[1] >= brush.low && row[1] <= brush.high);
    expect(active).toEqual(oracle);
    expect(active.filter(Boolean)).toHaveLength(3);
  });

  it("intersects brushes on different axes", () => {
    const active = activeRows(rows, [
      { axis: 0, low: 1, high: 1 },
      { axis: 3, low: 4, high: 9 },
    ]);
    expect(active).toEqual([false, false, false, true]);
  });
});

describe("responsive stacking", () => {
  it("is a pure function of viewport width with threshold 900", () => {
    expect(chartsStacked(899)).toBe(true);
    expect(chartsStacked(900)).toBe(false);
    expect(chartsStacked(390)).toBe(true);
    expect(chartsStacked(1920)).toBe(false);
  });
});
