/** Pure fold of session updates, mirroring the server's apply semantics.
 *
 * The server validates every update before broadcasting, so folding trusts
 * the values; what matters is that the *effect* of each path is identical
 * on every replica, including camera fan-out while sync_cameras is on and
 * the timestep clamp when a view switches scenario.
 */

import type { Camera, Catalog, SessionState, ViewState } from "./model.js";

export const MAX_VIEWS = 8;

function clone<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}

export function defaultCamera(): Camera {
  return {
    position: [0.0, 0.0, 250.0],
    orientation: [0.0, 0.0, 0.0, 1.0],
    target: [0.0, 0.0, 0.0],
  };
}

export function defaultView(): ViewState {
  return {
    scenario_id: "learning",
    timestep: 0,
    visibility: "both",
    display_mode: "dynamic_radius",
    color_property: "calcium",
    range_mode: "global",
    diff: null,
    near_clip: 0.1,
    camera: defaultCamera(),
  };
}

export function defaultSessionState(): SessionState {
  return {
    view_count: 1,
    views: [defaultView()],
    sync_cameras: false,
    chart_source_view: 0,
  };
}

/** Largest recorded step <= current, else the scenario's first step. */
export function clampTimestep(timestep: number, scenarioId: string, catalog: Catalog | null): number {
  if (!catalog || !(scenarioId in catalog.timesteps)) return timestep;
  const steps = catalog.timesteps[scenarioId];
  if (steps.length === 0 || steps.includes(timestep)) return timestep;
  const earlier = steps.filter((t) => t <= timestep);
  return earlier.length ? Math.max(...earlier) : steps[0];
}

/** Fold one broadcast update into a session state; returns a new state. */
export function applyUpdate(
  state: SessionState,
  path: string,
  value: unknown,
  catalog: Catalog | null = null,
): SessionState {
  const next = clone(state);
  const parts = path.split(".");

  if (parts.length === 1 && parts[0] === "view_count") {
    const count = value as number;
    while (next.views.length < count) next.views.push(clone(next.views[next.views.length - 1]));
    next.views.length = count;
    next.view_count = count;
    next.chart_source_view = Math.min(next.chart_source_view, count - 1);
    return next;
  }

  if (parts.length === 1 && parts[0] === "sync_cameras") {
    next.sync_cameras = value as boolean;
    if (next.sync_cameras) {
      for (const view of next.views) view.camera = clone(next.views[0].camera);
    }
    return next;
  }

  if (parts.length === 1 && parts[0] === "chart_source_view") {
    next.chart_source_view = value as number;
    return next;
  }

  if (parts.length === 3 && parts[0] === "views") {
    const index = Number(parts[1]);
    const view = next.views[index];
    if (!view) throw new Error(`no view ${parts[1]} to fold into`);
    const field = parts[2];
    switch (field) {
      case "scenario_id":
        view.scenario_id = value as string;
        view.timestep = clampTimestep(view.timestep, view.scenario_id, catalog);
        return next;
      case "timestep":
        view.timestep = value as number;
        return next;
      case "visibility":
        view.visibility = value as ViewState["visibility"];
        return next;
      case "display_mode":
        view.display_mode = value as ViewState["display_mode"];
        return next;
      case "color_property":
        view.color_property = value as ViewState["color_property"];
        return next;
      case "range_mode":
        view.range_mode = value as ViewState["range_mode"];
        return next;
      case "diff":
        view.diff = clone(value) as ViewState["diff"];
        return next;
      case "near_clip":
        view.near_clip = value as number;
        return next;
      case "camera": {
        const camera = clone(value) as Camera;
        if (next.sync_cameras) {
          for (const v of next.views) v.camera = clone(camera);
        } else {
          view.camera = camera;
        }
        return next;
      }
    }
  }
  throw new Error(`cannot fold unknown path ${path}`);
}
