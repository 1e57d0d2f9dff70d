/** Statistics page entry: three linked charts following the session's
 * chart_source_view. Brushing the parallel coordinates is local-only. */

import { ApiClient } from "../api.js";
import { PROPERTY_LABELS, type NeuronProperty, type StatsResponse } from "../model.js";
import { SessionClient, sessionIdFromHash } from "../session.js";
import { boxIndexAt, drawBoxPlot, drawHistogram, drawParallelCoords, parallelLayout } from "./draw.js";
import { ChartFollower, chartsStacked, type Brush } from "./logic.js";

async function boot(): Promise<void> {
  const api = new ApiClient();
  const catalog = await api.catalog();

  const root = document.getElementById("charts")!;
  const banner = document.createElement("div");
  banner.id = "banner";
  banner.hidden = true;
  const header = document.createElement("div");
  header.id = "charts-header";
  header.textContent = "brain plasticity statistics";
  const grid = document.createElement("div");
  grid.id = "charts-grid";
  const histogramCanvas = canvasIn(grid, "histogram");
  const parallelCanvas = canvasIn(grid, "parallel");
  const boxCanvas = canvasIn(grid, "boxes");
  root.append(banner, header, grid);

  let current: StatsResponse | null = null;
  let brushes: Brush[] = [];
  let hoverBox: number | null = null;

  function redraw(): void {
    grid.classList.toggle("stacked", chartsStacked(window.innerWidth));
    if (!current) return;
    const label = PROPERTY_LABELS[current.property as NeuronProperty] ?? current.property;
    const where = `${current.scenario_id} t=${current.timestep}`;
    drawHistogram(histogramCanvas, current.histogram, `${label} histogram (${where})`);
    drawParallelCoords(parallelCanvas, current.parallel_coords, brushes, "parallel coordinates");
    drawBoxPlot(boxCanvas, current.box_stats, `${label} by area`, hoverBox);
  }

  const follower = new ChartFollower(
    (key) => api.stats(key.scenario_id, key.timestep, key.property, key.range_mode),
    (stats) => {
      current = stats;
      brushes = [];
      banner.hidden = true;
      redraw();
    },
    (error) => {
      banner.textContent = `stats fetch failed: ${String(error)} (keeping previous charts)`;
      banner.hidden = false;
    },
  );

  const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
  const client = new SessionClient(wsUrl, catalog, {
    onState: (state) => {
      header.textContent = `brain plasticity statistics - session ${client.sessionId ?? ""}`;
      follower.onState(state);
    },
    onServerError: (code, message) => {
      banner.textContent = `session error: ${code} ${message}`;
      banner.hidden = false;
    },
    onClose: () => {
      banner.textContent = "session lost, retrying";
      banner.hidden = false;
      setTimeout(() => void reconnect(), 1000);
    },
  });

  async function reconnect(): Promise<void> {
    try {
      await client.connect();
      const sessionId = sessionIdFromHash(location.hash);
      if (sessionId) client.join(sessionId);
      else client.createSession();
    } catch {
      setTimeout(() => void reconnect(), 1500);
    }
  }
  await reconnect();

  // local-only brushing on the parallel coordinates
  let brushing: { axis: number; startY: number } | null = null;
  parallelCanvas.addEventListener("pointerdown", (event) => {
    if (!current) return;
    const layout = parallelLayout(parallelCanvas, current.parallel_coords);
    const bounds = parallelCanvas.getBoundingClientRect();
    const x = event.clientX - bounds.left;
    for (let axis = 0; axis < current.parallel_coords.axes.length; axis++) {
      if (Math.abs(layout.axisX(axis) - x) < 10) {
        brushing = { axis, startY: event.clientY - bounds.top };
        parallelCanvas.setPointerCapture(event.pointerId);
        return;
      }
    }
  });
  parallelCanvas.addEventListener("pointermove", (event) => {
    if (!brushing || !current) return;
    const layout = parallelLayout(parallelCanvas, current.parallel_coords);
    const bounds = parallelCanvas.getBoundingClientRect();
    const y = event.clientY - bounds.top;
    const { min, max } = layout.extents[brushing.axis];
    const toValue = (py: number) => {
      const t = (layout.bottom - py) / (layout.bottom - layout.top);
      return min + Math.min(Math.max(t, 0), 1) * (max - min);
    };
    const a = toValue(brushing.startY);
    const b = toValue(y);
    brushes = brushes.filter((brush) => brush.axis !== brushing!.axis);
    brushes.push({ axis: brushing.axis, low: Math.min(a, b), high: Math.max(a, b) });
    redraw();
  });
  parallelCanvas.addEventListener("pointerup", () => {
    brushing = null;
  });
  parallelCanvas.addEventListener("dblclick", () => {
    brushes = [];
    redraw();
  });

  boxCanvas.addEventListener("pointermove", (event) => {
    if (!current) return;
    const hit = boxIndexAt(boxCanvas, current.box_stats, event.clientX);
    if (hit !== hoverBox) {
      hoverBox = hit;
      redraw();
    }
  });
  boxCanvas.addEventListener("pointerleave", () => {
    hoverBox = null;
    redraw();
  });

  window.addEventListener("resize", redraw);
}

function canvasIn(parent: HTMLElement, id: string): HTMLCanvasElement {
  const wrap = document.createElement("div");
  wrap.className = "chart-cell";
  wrap.id = `cell-${id}`;
  const canvas = document.createElement("canvas");
  canvas.id = id;
  wrap.appendChild(canvas);
  parent.appendChild(wrap);
  return canvas;
}

boot().catch((error) => {
  const root = document.getElementById("charts");
  if (root) root.innerHTML = `<div class="boot-error">failed to start: ${String(error)}</div>`;
  console.error(error);
});
