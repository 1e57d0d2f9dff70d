/** Thin fetch layer over the data service. */

import type { Catalog, StatsResponse } from "./model.js";
import {
  decodeFramePayload,
  decodePositions,
  type DecodedDiff,
  type DecodedFrame,
  type Positions,
} from "./payload.js";

export class ApiClient {
  constructor(private baseUrl = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { error?: string; message?: string };
        detail = body.message ?? body.error ?? detail;
      } catch {
        // not JSON; keep the status text
      }
      throw new Error(`GET ${path} failed: ${detail}`);
    }
    return (await response.json()) as T;
  }

  private async getBinary(path: string): Promise<ArrayBuffer> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) throw new Error(`GET ${path} failed: ${response.status}`);
    return await response.arrayBuffer();
  }

  catalog(): Promise<Catalog> {
    return this.getJson<Catalog>("/api/catalog");
  }

  async positions(): Promise<Positions> {
    return decodePositions(await this.getBinary("/api/positions"));
  }

  async frame(scenarioId: string, timestep: number): Promise<DecodedFrame> {
    const payload = decodeFramePayload(
      await this.getBinary(`/api/frame/${encodeURIComponent(scenarioId)}/${timestep}`),
    );
    if (payload.kind !== "frame") throw new Error("expected a frame payload");
    return payload;
  }

  async diff(
    base: { scenario_id: string; timestep: number },
    other: { scenario_id: string; timestep: number },
  ): Promise<DecodedDiff> {
    const query = new URLSearchParams({
      baseScenario: base.scenario_id,
      baseT: String(base.timestep),
      otherScenario: other.scenario_id,
      otherT: String(other.timestep),
    });
    const payload = decodeFramePayload(await this.getBinary(`/api/diff?${query}`));
    if (payload.kind !== "diff") throw new Error("expected a diff payload");
    return payload;
  }

  stats(
    scenarioId: string,
    timestep: number,
    property: string,
    rangeMode: string,
    bins?: number,
  ): Promise<StatsResponse> {
    const query = new URLSearchParams({ rangeMode });
    if (bins !== undefined) query.set("bins", String(bins));
    return this.getJson<StatsResponse>(
      `/api/stats/${encodeURIComponent(scenarioId)}/${timestep}/${property}?${query}`,
    );
  }
}
