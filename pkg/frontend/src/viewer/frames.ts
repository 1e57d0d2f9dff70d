/** Frame/diff fetching with a small cache. Requests are keyed by
 * (scenario, timestep); per consumer only the latest request wins, so a
 * stale response can never overwrite a newer view configuration. */

import type { ApiClient } from "../api.js";
import type { DecodedDiff, DecodedFrame } from "../payload.js";

const CACHE_LIMIT = 24;

export class FrameStore {
  private frames = new Map<string, DecodedFrame>();
  private diffs = new Map<string, DecodedDiff>();
  private latestWant = new Map<string, string>();

  constructor(private api: ApiClient) {}

  private trim(map: Map<string, unknown>): void {
    while (map.size > CACHE_LIMIT) {
      const oldest = map.keys().next().value as string;
      map.delete(oldest);
    }
  }

  /** Resolve a frame for a consumer (e.g. "view3"); resolves null when a
   * newer request for the same consumer superseded this one. */
  async frameFor(consumer: string, scenarioId: string, timestep: number): Promise<DecodedFrame | null> {
    const key = `${scenarioId}:${timestep}`;
    this.latestWant.set(consumer, key);
    const cached = this.frames.get(key);
    if (cached) return cached;
    const frame = await this.api.frame(scenarioId, timestep);
    this.frames.set(key, frame);
    this.trim(this.frames);
    return this.latestWant.get(consumer) === key ? frame : null;
  }

  async diffFor(
    consumer: string,
    base: { scenario_id: string; timestep: number },
    other: { scenario_id: string; timestep: number },
  ): Promise<DecodedDiff | null> {
    const key = `${base.scenario_id}:${base.timestep}>${other.scenario_id}:${other.timestep}`;
    this.latestWant.set(`diff:${consumer}`, key);
    const cached = this.diffs.get(key);
    if (cached) return cached;
    const diff = await this.api.diff(base, other);
    this.diffs.set(key, diff);
    this.trim(this.diffs);
    return this.latestWant.get(`diff:${consumer}`) === key ? diff : null;
  }
}
