/** DOM construction for the global bar, per-view panels, and the cluster
 * table. Widgets report edits through callbacks and are refreshed from the
 * replicated state, so the server echo stays authoritative. */

import { NEAR_CLIP_MAX, NEAR_CLIP_MIN } from "../encodings.js";
import {
  NEURON_PROPERTIES,
  PROPERTY_LABELS,
  type Catalog,
  type SessionState,
  type ViewState,
} from "../model.js";
import type { DecodedFrame, Positions } from "../payload.js";
import { propertyColumn } from "../payload.js";

export interface GlobalBarEvents {
  onViewCount(count: number): void;
  onSyncCameras(enabled: boolean): void;
  onCreateSession(): void;
  onJoinSession(sessionId: string): void;
}

export class GlobalBar {
  readonly element: HTMLElement;
  private viewCountSelect: HTMLSelectElement;
  private syncBox: HTMLInputElement;
  private sessionLabel: HTMLElement;
  private joinInput: HTMLInputElement;
  private capacityLabel: HTMLElement;

  constructor(events: GlobalBarEvents) {
    this.element = el("div", "global-bar");
    const title = el("span", "app-title");
    title.textContent = "plastiscope";
    this.element.appendChild(title);

    this.viewCountSelect = document.createElement("select");
    for (let i = 1; i <= 8; i++) {
      const option = document.createElement("option");
      option.value = String(i);
      option.textContent = `${i} view${i > 1 ? "s" : ""}`;
      this.viewCountSelect.appendChild(option);
    }
    this.viewCountSelect.addEventListener("change", () =>
      events.onViewCount(Number(this.viewCountSelect.value)),
    );
    this.element.appendChild(labelled("views", this.viewCountSelect));

    this.capacityLabel = el("span", "capacity-label");
    this.element.appendChild(this.capacityLabel);

    this.syncBox = document.createElement("input");
    this.syncBox.type = "checkbox";
    this.syncBox.addEventListener("change", () => events.onSyncCameras(this.syncBox.checked));
    this.element.appendChild(labelled("sync cameras", this.syncBox));

    this.sessionLabel = el("span", "session-label");
    this.sessionLabel.textContent = "session: —";
    this.element.appendChild(this.sessionLabel);

    const createButton = document.createElement("button");
    createButton.textContent = "new session";
    createButton.addEventListener("click", () => events.onCreateSession());
    this.element.appendChild(createButton);

    this.joinInput = document.createElement("input");
    this.joinInput.placeholder = "CODE";
    this.joinInput.maxLength = 6;
    this.joinInput.className = "join-input";
    const joinButton = document.createElement("button");
    joinButton.textContent = "join";
    joinButton.addEventListener("click", () =>
      events.onJoinSession(this.joinInput.value.trim().toUpperCase()),
    );
    this.element.appendChild(this.joinInput);
    this.element.appendChild(joinButton);

    const chartsLink = document.createElement("a");
    chartsLink.textContent = "charts";
    chartsLink.className = "charts-link";
    chartsLink.target = "_blank";
    this.element.appendChild(chartsLink);
    this.chartsLink = chartsLink;
  }

  private chartsLink: HTMLAnchorElement;

  refresh(state: SessionState, sessionId: string | null, capacity: number, rendered: number): void {
    this.viewCountSelect.value = String(state.view_count);
    this.syncBox.checked = state.sync_cameras;
    this.sessionLabel.textContent = sessionId ? `session: ${sessionId}` : "session: —";
    this.capacityLabel.textContent =
      rendered < state.view_count ? `showing ${rendered}/${state.view_count} (capacity ${capacity})` : "";
    this.chartsLink.href = sessionId ? `charts.html#session=${sessionId}` : "charts.html";
  }
}

export interface ViewPanelEvents {
  onUpdate(viewIndex: number, field: string, value: unknown): void;
}

export class ViewPanel {
  readonly element: HTMLElement;
  private scenario: HTMLSelectElement;
  private timestep: HTMLInputElement;
  private timestepLabel: HTMLElement;
  private property: HTMLSelectElement;
  private rangeMode: HTMLSelectElement;
  private visibility: HTMLSelectElement;
  private displayMode: HTMLSelectElement;
  private nearClip: HTMLInputElement;
  private diffEnabled: HTMLInputElement;
  private diffScenario: HTMLSelectElement;
  private diffTimestep: HTMLInputElement;
  private muted = false;

  constructor(
    readonly viewIndex: number,
    private catalog: Catalog,
    events: ViewPanelEvents,
  ) {
    this.element = el("div", "view-panel");
    const send = (field: string, value: unknown) => {
      if (!this.muted) events.onUpdate(this.viewIndex, field, value);
    };

    this.scenario = selectOf(catalog.scenarios.map((s) => [s.id, s.name]));
    this.scenario.addEventListener("change", () => send("scenario_id", this.scenario.value));
    this.element.appendChild(labelled("scenario", this.scenario));

    this.timestep = document.createElement("input");
    this.timestep.type = "range";
    this.timestep.min = "0";
    this.timestepLabel = el("span", "timestep-label");
    this.timestep.addEventListener("change", () => {
      const steps = this.catalog.timesteps[this.scenario.value] ?? [0];
      send("timestep", steps[Number(this.timestep.value)] ?? 0);
    });
    const timestepWrap = labelled("timestep", this.timestep);
    timestepWrap.appendChild(this.timestepLabel);
    this.element.appendChild(timestepWrap);

    this.property = selectOf(NEURON_PROPERTIES.map((p) => [p, PROPERTY_LABELS[p]]));
    this.property.addEventListener("change", () => send("color_property", this.property.value));
    this.element.appendChild(labelled("color by", this.property));

    this.rangeMode = selectOf([
      ["global", "global range"],
      ["local", "local range"],
    ]);
    this.rangeMode.addEventListener("change", () => send("range_mode", this.rangeMode.value));
    this.element.appendChild(labelled("range", this.rangeMode));

    this.visibility = selectOf([
      ["both", "neurons + connections"],
      ["neurons", "neurons"],
      ["connections", "connections"],
    ]);
    this.visibility.addEventListener("change", () => send("visibility", this.visibility.value));
    this.element.appendChild(labelled("show", this.visibility));

    this.displayMode = selectOf([
      ["dynamic_radius", "dynamic radius"],
      ["displaced", "displace to center"],
    ]);
    this.displayMode.addEventListener("change", () => send("display_mode", this.displayMode.value));
    this.element.appendChild(labelled("neurons as", this.displayMode));

    this.nearClip = document.createElement("input");
    this.nearClip.type = "range";
    this.nearClip.min = String(NEAR_CLIP_MIN);
    this.nearClip.max = String(NEAR_CLIP_MAX);
    this.nearClip.step = "0.1";
    this.nearClip.addEventListener("change", () => send("near_clip", Number(this.nearClip.value)));
    this.element.appendChild(labelled("near clip", this.nearClip));

    this.diffEnabled = document.createElement("input");
    this.diffEnabled.type = "checkbox";
    this.diffScenario = selectOf(catalog.scenarios.map((s) => [s.id, s.name]));
    this.diffTimestep = document.createElement("input");
    this.diffTimestep.type = "number";
    this.diffTimestep.min = "0";
    this.diffTimestep.className = "diff-timestep";
    const sendDiff = () => {
      if (this.muted) return;
      if (!this.diffEnabled.checked) {
        send("diff", null);
        return;
      }
      send("diff", {
        scenario_id: this.diffScenario.value,
        timestep: Number(this.diffTimestep.value) || 0,
      });
    };
    this.diffEnabled.addEventListener("change", sendDiff);
    this.diffScenario.addEventListener("change", sendDiff);
    this.diffTimestep.addEventListener("change", sendDiff);
    const diffWrap = labelled("diff vs", this.diffEnabled);
    diffWrap.appendChild(this.diffScenario);
    diffWrap.appendChild(this.diffTimestep);
    this.element.appendChild(diffWrap);
  }

  refresh(view: ViewState): void {
    this.muted = true;
    try {
      this.scenario.value = view.scenario_id;
      const steps = this.catalog.timesteps[view.scenario_id] ?? [0];
      this.timestep.max = String(Math.max(steps.length - 1, 0));
      const index = Math.max(steps.indexOf(view.timestep), 0);
      this.timestep.value = String(index);
      this.timestepLabel.textContent = ` t=${view.timestep}`;
      this.property.value = view.color_property;
      this.rangeMode.value = view.range_mode;
      this.visibility.value = view.visibility;
      this.displayMode.value = view.display_mode;
      this.nearClip.value = String(view.near_clip);
      this.diffEnabled.checked = view.diff !== null;
      if (view.diff) {
        this.diffScenario.value = view.diff.scenario_id;
        this.diffTimestep.value = String(view.diff.timestep);
      }
    } finally {
      this.muted = false;
    }
  }
}

/** Raw values of all nine properties for the ten neurons of one cluster. */
export function clusterTable(
  clusterId: number,
  frame: DecodedFrame,
  positions: Positions,
  areaNames: string[],
): HTMLElement {
  const wrap = el("div", "cluster-table");
  const heading = document.createElement("h3");
  heading.textContent = `cluster ${clusterId}`;
  wrap.appendChild(heading);
  const table = document.createElement("table");
  const head = document.createElement("tr");
  head.appendChild(cell("th", "neuron"));
  for (const property of NEURON_PROPERTIES) head.appendChild(cell("th", PROPERTY_LABELS[property]));
  table.appendChild(head);
  for (let slot = 0; slot < 10; slot++) {
    const neuron = clusterId * 10 + slot;
    const row = document.createElement("tr");
    row.appendChild(cell("td", String(neuron)));
    for (const property of NEURON_PROPERTIES) {
      let text: string;
      if (property === "area") {
        text = areaNames[positions.area_id[neuron]] ?? String(positions.area_id[neuron]);
      } else {
        const value = Number(propertyColumn(frame, property, positions.area_id)[neuron]);
        text = Number.isInteger(value) ? String(value) : value.toFixed(4);
      }
      row.appendChild(cell("td", text));
    }
    table.appendChild(row);
  }
  wrap.appendChild(table);
  const hint = el("div", "cluster-hint");
  hint.textContent = "click elsewhere to close";
  wrap.appendChild(hint);
  return wrap;
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}

function cell(tag: "td" | "th", text: string): HTMLElement {
  const node = document.createElement(tag);
  node.textContent = text;
  return node;
}

function labelled(text: string, control: HTMLElement): HTMLElement {
  const wrap = el("label", "control");
  const span = document.createElement("span");
  span.textContent = text;
  wrap.appendChild(span);
  wrap.appendChild(control);
  return wrap;
}

function selectOf(options: Array<[string, string]>): HTMLSelectElement {
  const select = document.createElement("select");
  for (const [value, label] of options) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = label;
    select.appendChild(option);
  }
  return select;
}
