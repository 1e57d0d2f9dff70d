/** Viewer page entry: 1-8 synchronized 3D views over one WebGL2 canvas. */

import { ApiClient } from "../api.js";
import { gridFor, layoutViews } from "../encodings.js";
import type { Catalog, SessionState } from "../model.js";
import type { DecodedDiff, DecodedFrame } from "../payload.js";
import { SessionClient, hashForSession, sessionIdFromHash } from "../session.js";
import { orbit, pan, zoom } from "./camera.js";
import { FrameStore } from "./frames.js";
import { vsub, vlength, type Vec3 } from "./gfx.js";
import { clusterCentroids, pickCluster, pickRay } from "./picking.js";
import { buildDrawPlan, buildStaticGeometry, type ViewDrawPlan } from "./plan.js";
import { Renderer, type ViewportRect } from "./renderer.js";
import { GlobalBar, ViewPanel, clusterTable } from "./ui.js";

interface PerView {
  frame: DecodedFrame | null;
  diff: DecodedDiff | null;
  plan: ViewDrawPlan | null;
  panel: ViewPanel;
  cell: HTMLElement;
}

async function boot(): Promise<void> {
  const api = new ApiClient();
  const catalog: Catalog = await api.catalog();
  const positions = await api.positions();
  const statics = buildStaticGeometry(positions);
  const clusters = clusterCentroids(positions);
  const frames = new FrameStore(api);

  const root = document.getElementById("app")!;
  const stage = document.createElement("div");
  stage.id = "stage";
  const canvas = document.createElement("canvas");
  canvas.id = "scene";
  const grid = document.createElement("div");
  grid.id = "view-grid";
  stage.appendChild(canvas);
  stage.appendChild(grid);
  const renderer = new Renderer(canvas);
  renderer.setStatics(positions, statics.brainCentroid);

  let extent = 0;
  for (let i = 0; i < positions.neuron_count; i++) {
    const p: Vec3 = [
      positions.positions[i * 3],
      positions.positions[i * 3 + 1],
      positions.positions[i * 3 + 2],
    ];
    extent = Math.max(extent, vlength(vsub(p, statics.brainCentroid)));
  }

  const views: PerView[] = [];
  let state: SessionState | null = null;
  let selectedCluster: number | null = null;
  let tableOverlay: HTMLElement | null = null;

  const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
  const client = new SessionClient(wsUrl, catalog, {
    onState: (next) => {
      state = next;
      syncViews();
    },
    onSessionId: (sessionId) => {
      history.replaceState(null, "", hashForSession(sessionId));
      refreshChrome();
    },
    onServerError: (code, message) => {
      if (code === "no_such_session") {
        client.createSession();
      } else {
        console.warn("session error", code, message);
      }
    },
  });

  const bar = new GlobalBar({
    onViewCount: (count) => client.update("view_count", count),
    onSyncCameras: (enabled) => client.update("sync_cameras", enabled),
    onCreateSession: () => client.createSession(),
    onJoinSession: (sessionId) => {
      if (sessionId) client.join(sessionId);
    },
  });
  root.appendChild(bar.element);
  root.appendChild(stage);

  await client.connect();
  const fromHash = sessionIdFromHash(location.hash);
  if (fromHash) client.join(fromHash);
  else client.createSession();

  function capacity(): number {
    return layoutViews(window.innerWidth, window.innerHeight).capacity;
  }

  function renderedCount(): number {
    if (!state) return 0;
    return Math.min(state.view_count, capacity());
  }

  function refreshChrome(): void {
    if (!state) return;
    bar.refresh(state, client.sessionId, capacity(), renderedCount());
  }

  function cellRect(index: number): ViewportRect {
    const shown = renderedCount();
    const { rows, columns } = gridFor(shown);
    const stageWidth = stage.clientWidth;
    const stageHeight = stage.clientHeight;
    const width = stageWidth / columns;
    const height = stageHeight / rows;
    const row = Math.floor(index / columns);
    const column = index % columns;
    const ratio = window.devicePixelRatio || 1;
    return {
      x: Math.round(column * width * ratio),
      y: Math.round((stageHeight - (row + 1) * height) * ratio),
      width: Math.round(width * ratio),
      height: Math.round(height * ratio),
    };
  }

  function syncViews(): void {
    if (!state) return;
    const shown = renderedCount();
    while (views.length < shown) {
      const index = views.length;
      const cell = document.createElement("div");
      cell.className = "view-cell";
      const panel = new ViewPanel(index, catalog, {
        onUpdate: (viewIndex, field, value) => client.update(`views.${viewIndex}.${field}`, value),
      });
      cell.appendChild(panel.element);
      grid.appendChild(cell);
      views.push({ frame: null, diff: null, plan: null, panel, cell });
      attachPointerHandlers(cell, index);
    }
    while (views.length > shown) {
      const dropped = views.pop()!;
      dropped.cell.remove();
    }
    const { rows, columns } = gridFor(shown);
    grid.style.gridTemplateRows = `repeat(${rows}, 1fr)`;
    grid.style.gridTemplateColumns = `repeat(${columns}, 1fr)`;

    for (let i = 0; i < shown; i++) {
      const view = state.views[i];
      views[i].panel.refresh(view);
      void loadView(i);
    }
    refreshChrome();
  }

  async function loadView(index: number): Promise<void> {
    if (!state || index >= views.length) return;
    const view = state.views[index];
    const slot = views[index];
    try {
      const frame = await frames.frameFor(`view${index}`, view.scenario_id, view.timestep);
      if (frame) slot.frame = frame;
      if (view.diff) {
        const diff = await frames.diffFor(
          `view${index}`,
          { scenario_id: view.scenario_id, timestep: view.timestep },
          view.diff,
        );
        if (diff) slot.diff = diff;
      } else {
        slot.diff = null;
      }
    } catch (error) {
      console.warn("frame load failed", error);
      return;
    }
    if (slot.frame && state) {
      slot.plan = buildDrawPlan(state.views[index], slot.frame, slot.diff, catalog, statics);
    }
  }

  function attachPointerHandlers(cell: HTMLElement, index: number): void {
    let dragging = false;
    let panning = false;
    let lastX = 0;
    let lastY = 0;
    let moved = 0;

    cell.addEventListener("pointerdown", (event) => {
      dragging = true;
      panning = event.button === 2 || event.shiftKey;
      lastX = event.clientX;
      lastY = event.clientY;
      moved = 0;
      cell.setPointerCapture(event.pointerId);
    });
    cell.addEventListener("pointermove", (event) => {
      if (!dragging || !state) return;
      const dx = event.clientX - lastX;
      const dy = event.clientY - lastY;
      lastX = event.clientX;
      lastY = event.clientY;
      moved += Math.abs(dx) + Math.abs(dy);
      const camera = state.views[index].camera;
      const next = panning ? pan(camera, dx, dy) : orbit(camera, dx, dy);
      client.updateCamera(`views.${index}.camera`, next);
    });
    cell.addEventListener("pointerup", (event) => {
      dragging = false;
      if (moved < 4 && event.ctrlKey) selectAt(event, index);
      else if (moved < 4) clearSelection();
    });
    cell.addEventListener("contextmenu", (event) => event.preventDefault());
    cell.addEventListener(
      "wheel",
      (event) => {
        if (!state) return;
        event.preventDefault();
        const next = zoom(state.views[index].camera, event.deltaY);
        client.updateCamera(`views.${index}.camera`, next);
      },
      { passive: false },
    );
  }

  function selectAt(event: PointerEvent, index: number): void {
    if (!state) return;
    const slot = views[index];
    if (!slot.frame) return;
    const bounds = slot.cell.getBoundingClientRect();
    const ndcX = ((event.clientX - bounds.left) / bounds.width) * 2 - 1;
    const ndcY = -(((event.clientY - bounds.top) / bounds.height) * 2 - 1);
    const view = state.views[index];
    const ray = pickRay(view.camera, ndcX, ndcY, Math.PI / 4, bounds.width / bounds.height);
    const hit = pickCluster(ray.origin, ray.direction, clusters);
    clearSelection();
    if (hit === null) return;
    selectedCluster = hit;
    tableOverlay = clusterTable(hit, slot.frame, positions, catalog.area_table);
    tableOverlay.addEventListener("click", () => clearSelection());
    slot.cell.appendChild(tableOverlay);
  }

  function clearSelection(): void {
    selectedCluster = null;
    tableOverlay?.remove();
    tableOverlay = null;
  }

  function resizeCanvas(): void {
    const ratio = window.devicePixelRatio || 1;
    canvas.width = Math.round(stage.clientWidth * ratio);
    canvas.height = Math.round(stage.clientHeight * ratio);
    refreshChrome();
    syncViews();
  }
  window.addEventListener("resize", resizeCanvas);
  resizeCanvas();

  function draw(): void {
    renderer.beginFrame();
    if (state) {
      const shown = renderedCount();
      for (let i = 0; i < shown && i < views.length; i++) {
        const slot = views[i];
        if (!slot.plan) continue;
        const view = state.views[i];
        renderer.drawView(i, {
          rect: cellRect(i),
          camera: view.camera,
          nearClip: view.near_clip,
          displayMode: view.display_mode,
          plan: slot.plan,
          selectedCluster,
        });
      }
    }
    requestAnimationFrame(draw);
  }
  requestAnimationFrame(draw);
}

boot().catch((error) => {
  const root = document.getElementById("app");
  if (root) {
    root.innerHTML = `<div class="boot-error">failed to start: ${String(error)}</div>`;
  }
  console.error(error);
});
