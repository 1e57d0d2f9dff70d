/** Decoders for the binary wire formats (see docs/payload_formats.md).
 *
 * Everything is little-endian and unpadded. Column descriptors carry a
 * logical dtype (what the column decodes to) and a wire dtype (how it was
 * shipped); narrowed integers widen back losslessly.
 */

export type ColumnArray =
  | Float32Array
  | Float64Array
  | Uint8Array
  | Uint16Array
  | Uint32Array
  | Int8Array
  | Int16Array
  | Int32Array
  | BigInt64Array;

export interface DecodedFrame {
  kind: "frame";
  scenario_id: string;
  timestep: number;
  neuron_count: number;
  area_count: number;
  connectivity_missing: boolean;
  columns: Record<string, ColumnArray>;
  /** Dense area x area matrix, row-major: counts[s * A + t]. */
  connectivity: Float64Array;
}

export interface DecodedDiff {
  kind: "diff";
  base: { scenario_id: string; timestep: number };
  other: { scenario_id: string; timestep: number };
  neuron_count: number;
  area_count: number;
  columns: Record<string, ColumnArray>;
  connectivity: Float64Array;
}

export interface Positions {
  neuron_count: number;
  positions: Float32Array; // xyz interleaved
  cluster_id: Uint32Array;
  cluster_slot: Uint32Array;
  area_id: Uint32Array;
}

const DTYPE_BITS = 0;

interface DtypeSpec {
  size: number;
  read(view: DataView, offset: number): number;
  make(n: number): ColumnArray;
  set(arr: ColumnArray, i: number, v: number): void;
}

const DTYPES: Record<number, DtypeSpec> = {
  1: { size: 1, read: (v, o) => v.getUint8(o), make: (n) => new Uint8Array(n), set: (a, i, x) => ((a as Uint8Array)[i] = x) },
  2: { size: 2, read: (v, o) => v.getUint16(o, true), make: (n) => new Uint16Array(n), set: (a, i, x) => ((a as Uint16Array)[i] = x) },
  3: { size: 4, read: (v, o) => v.getUint32(o, true), make: (n) => new Uint32Array(n), set: (a, i, x) => ((a as Uint32Array)[i] = x) },
  4: { size: 1, read: (v, o) => v.getInt8(o), make: (n) => new Int8Array(n), set: (a, i, x) => ((a as Int8Array)[i] = x) },
  5: { size: 2, read: (v, o) => v.getInt16(o, true), make: (n) => new Int16Array(n), set: (a, i, x) => ((a as Int16Array)[i] = x) },
  6: { size: 4, read: (v, o) => v.getInt32(o, true), make: (n) => new Int32Array(n), set: (a, i, x) => ((a as Int32Array)[i] = x) },
  7: {
    size: 8,
    read: (v, o) => Number(v.getBigInt64(o, true)),
    make: (n) => new BigInt64Array(n),
    set: (a, i, x) => ((a as BigInt64Array)[i] = BigInt(x)),
  },
  8: { size: 4, read: (v, o) => v.getFloat32(o, true), make: (n) => new Float32Array(n), set: (a, i, x) => ((a as Float32Array)[i] = x) },
  9: { size: 8, read: (v, o) => v.getFloat64(o, true), make: (n) => new Float64Array(n), set: (a, i, x) => ((a as Float64Array)[i] = x) },
};

class Reader {
  private view: DataView;
  offset = 0;

  constructor(private data: ArrayBuffer) {
    this.view = new DataView(data);
  }

  u8(): number {
    return this.view.getUint8(this.offset++);
  }

  u16(): number {
    const v = this.view.getUint16(this.offset, true);
    this.offset += 2;
    return v;
  }

  u32(): number {
    const v = this.view.getUint32(this.offset, true);
    this.offset += 4;
    return v;
  }

  str(): string {
    const length = this.u8();
    const raw = new Uint8Array(this.data, this.offset, length);
    this.offset += length;
    return new TextDecoder().decode(raw);
  }

  magic(): string {
    const raw = new Uint8Array(this.data, this.offset, 4);
    this.offset += 4;
    return String.fromCharCode(...raw);
  }

  /** N elements of the wire dtype, widened into the logical dtype's array. */
  column(n: number, logical: number, wire: number): ColumnArray {
    if (wire === DTYPE_BITS) {
      const packed = new Uint8Array(this.data, this.offset, Math.ceil(n / 8));
      this.offset += packed.length;
      const out = new Uint8Array(n);
      for (let i = 0; i < n; i++) out[i] = (packed[i >> 3] >> (i & 7)) & 1;
      return out;
    }
    const wireSpec = DTYPES[wire];
    const logicalSpec = DTYPES[logical];
    if (!wireSpec || !logicalSpec) throw new Error(`unknown dtype code ${logical}/${wire}`);
    const out = logicalSpec.make(n);
    for (let i = 0; i < n; i++) {
      logicalSpec.set(out, i, wireSpec.read(this.view, this.offset));
      this.offset += wireSpec.size;
    }
    return out;
  }

  remaining(): number {
    return this.data.byteLength - this.offset;
  }
}

export function decodeFramePayload(data: ArrayBuffer): DecodedFrame | DecodedDiff {
  const r = new Reader(data);
  if (r.magic() !== "PLSF") throw new Error("bad payload magic");
  const version = r.u8();
  if (version !== 1) throw new Error(`unsupported payload version ${version}`);
  const kind = r.u8();
  const columnCount = r.u16();
  const n = r.u32();
  const a = r.u16();
  const connLogical = r.u8();
  const connWire = r.u8();
  const connRows = r.u32();
  const flags = r.u8();

  let frameContext: { scenario_id: string; timestep: number } | null = null;
  let diffContext: { base: DecodedDiff["base"]; other: DecodedDiff["other"] } | null = null;
  if (kind === 0) {
    frameContext = { scenario_id: r.str(), timestep: r.u32() };
  } else if (kind === 1) {
    const base = { scenario_id: r.str(), timestep: r.u32() };
    const other = { scenario_id: r.str(), timestep: r.u32() };
    diffContext = { base, other };
  } else {
    throw new Error(`unknown payload kind ${kind}`);
  }

  const descriptors: Array<{ name: string; logical: number; wire: number }> = [];
  for (let i = 0; i < columnCount; i++) {
    const name = r.str();
    const logical = r.u8();
    const wire = r.u8();
    descriptors.push({ name, logical, wire });
  }
  const columns: Record<string, ColumnArray> = {};
  for (const d of descriptors) columns[d.name] = r.column(n, d.logical, d.wire);

  const src = r.column(connRows, 2, 2) as Uint16Array;
  const dst = r.column(connRows, 2, 2) as Uint16Array;
  const values = r.column(connRows, connLogical, connWire);
  if (r.remaining() !== 0) throw new Error("trailing bytes after payload");

  const connectivity = new Float64Array(a * a);
  for (let i = 0; i < connRows; i++) {
    connectivity[src[i] * a + dst[i]] = Number(values[i]);
  }

  if (kind === 0) {
    return {
      kind: "frame",
      scenario_id: frameContext!.scenario_id,
      timestep: frameContext!.timestep,
      neuron_count: n,
      area_count: a,
      connectivity_missing: (flags & 1) !== 0,
      columns,
      connectivity,
    };
  }
  return {
    kind: "diff",
    base: diffContext!.base,
    other: diffContext!.other,
    neuron_count: n,
    area_count: a,
    columns,
    connectivity,
  };
}

export function decodePositions(data: ArrayBuffer): Positions {
  const r = new Reader(data);
  if (r.magic() !== "PLSP") throw new Error("bad positions magic");
  const version = r.u8();
  if (version !== 1) throw new Error(`unsupported positions version ${version}`);
  r.u8();
  r.u16();
  const n = r.u32();
  if (r.remaining() !== n * 28) throw new Error("positions block has wrong size");
  const view = new DataView(data, r.offset);
  const positions = new Float32Array(n * 3);
  const clusterId = new Uint32Array(n);
  const clusterSlot = new Uint32Array(n);
  const areaId = new Uint32Array(n);
  for (let i = 0; i < n; i++) {
    const base = i * 28;
    positions[i * 3] = view.getFloat32(base + 4, true);
    positions[i * 3 + 1] = view.getFloat32(base + 8, true);
    positions[i * 3 + 2] = view.getFloat32(base + 12, true);
    clusterId[i] = view.getUint32(base + 16, true);
    clusterSlot[i] = view.getUint32(base + 20, true);
    areaId[i] = view.getUint32(base + 24, true);
  }
  return { neuron_count: n, positions, cluster_id: clusterId, cluster_slot: clusterSlot, area_id: areaId };
}

/** Per-neuron value array for one colorable property. */
export function propertyColumn(
  frame: DecodedFrame,
  property: string,
  areaIds: Uint32Array,
): ColumnArray {
  if (property === "area") return areaIds;
  const column = frame.columns[property];
  if (!column) throw new Error(`frame has no column ${property}`);
  return column;
}
