import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { decodeFramePayload, decodePositions, type DecodedDiff, type DecodedFrame } from "../src/payload";

const fixtures = join(__dirname, "fixtures");

function load(name: string): ArrayBuffer {
  const raw = readFileSync(join(fixtures, name));
  return raw.buffer.slice(raw.byteOffset, raw.byteOffset + raw.byteLength);
}

const expected = JSON.parse(readFileSync(join(fixtures, "expected.json"), "utf-8"));

describe("frame payload decoding", () => {
  const decoded = decodeFramePayload(load("frame.bin")) as DecodedFrame;

  it("reads the header and context", () => {
    expect(decoded.kind).toBe("frame");
    expect(decoded.scenario_id).toBe(expected.frame.scenario_id);
    expect(decoded.timestep).toBe(expected.frame.timestep);
    expect(decoded.neuron_count).toBe(expected.frame.neuron_count);
    expect(decoded.area_count).toBe(expected.frame.area_count);
    expect(decoded.connectivity_missing).toBe(false);
  });

  it("restores float columns bit-exactly", () => {
    const calcium = decoded.columns.calcium as Float32Array;
    expect(calcium).toBeInstanceOf(Float32Array);
    expect(Array.from(calcium)).toEqual(expected.frame.calcium);
  });

  it("unpacks the bit-packed fired column", () => {
    expect(Array.from(decoded.columns.fired as Uint8Array)).toEqual(expected.frame.fired);
  });

  it("widens narrowed count columns back to u32", () => {
    const synapsesIn = decoded.columns.synapses_in as Uint32Array;
    expect(synapsesIn).toBeInstanceOf(Uint32Array);
    expect(Array.from(synapsesIn)).toEqual(expected.frame.synapses_in);
  });

  it("rebuilds the dense connectivity matrix with omitted zeros", () => {
    expect(Array.from(decoded.connectivity)).toEqual(expected.frame.connectivity);
  });
});

describe("diff payload decoding", () => {
  const decoded = decodeFramePayload(load("diff.bin")) as DecodedDiff;

  it("reads both coordinates", () => {
    expect(decoded.kind).toBe("diff");
    expect([decoded.base.scenario_id, decoded.base.timestep]).toEqual(expected.diff.base);
    expect([decoded.other.scenario_id, decoded.other.timestep]).toEqual(expected.diff.other);
  });

  it("decodes signed columns", () => {
    expect(Array.from(decoded.columns.calcium as Float32Array)).toEqual(expected.diff.calcium);
    expect(Array.from(decoded.columns.fired as Int8Array)).toEqual(expected.diff.fired);
    const synapsesIn = decoded.columns.synapses_in as BigInt64Array;
    expect(Array.from(synapsesIn, Number)).toEqual(expected.diff.synapses_in);
  });

  it("decodes the signed connectivity delta", () => {
    expect(Array.from(decoded.connectivity)).toEqual(expected.diff.connectivity);
  });
});

describe("positions block decoding", () => {
  const block = decodePositions(load("positions.bin"));

  it("reads all records", () => {
    expect(block.neuron_count).toBe(expected.positions.neuron_count);
    const xs = Array.from({ length: block.neuron_count }, (_, i) => block.positions[i * 3]);
    expect(xs).toEqual(expected.positions.x);
    expect(Array.from(block.area_id)).toEqual(expected.positions.area_id);
  });

  it("derives cluster ids and slots", () => {
    expect(block.cluster_id[13]).toBe(1);
    expect(block.cluster_slot[13]).toBe(3);
  });

  it("rejects corrupted blocks", () => {
    expect(() => decodePositions(load("positions.bin").slice(0, 10))).toThrow();
    expect(() => decodeFramePayload(load("positions.bin"))).toThrow(/magic/);
  });
});
