/**
 * Binary embedding-store container (little-endian):
 *
 *   magic    4 bytes  "BAIT"
 *   version  u8       1
 *   space    u8       0 = SIM, 1 = NLI
 *   unit     u8       0 = head, 1 = body
 *   reserved u8       0
 *   dim      u32
 *   count    u32
 *   then per record: id u32, numRows u16, numRows*dim float32
 *
 * Head stores must carry exactly one row per record; every float must be
 * finite; ids must be unique.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export const MAGIC = Buffer.from("BAIT", "ascii");
export const VERSION = 1;
export const MAX_RECORD_ROWS = 0xffff;

export enum Space {
  SIM = 0,
  NLI = 1,
}

export enum Unit {
  HEAD = 0,
  BODY = 1,
}

export interface StoreRecord {
  id: number;
  /** row-major numRows x dim */
  values: Float32Array;
  numRows: number;
}

export interface Store {
  space: Space;
  unit: Unit;
  dim: number;
  records: StoreRecord[];
}

export function encodeStore(store: Store): Buffer {
  const header = Buffer.alloc(16);
  MAGIC.copy(header, 0);
  header.writeUInt8(VERSION, 4);
  header.writeUInt8(store.space, 5);
  header.writeUInt8(store.unit, 6);
  header.writeUInt8(0, 7);
  header.writeUInt32LE(store.dim, 8);
  header.writeUInt32LE(store.records.length, 12);

  const chunks: Buffer[] = [header];
  const seen = new Set<number>();
  for (const record of store.records) {
    if (seen.has(record.id)) {
      throw new Error(`duplicate record id ${record.id}`);
    }
    seen.add(record.id);
    if (record.numRows > MAX_RECORD_ROWS) {
      throw new Error(
        `record ${record.id} has ${record.numRows} rows; format caps at ${MAX_RECORD_ROWS}`,
      );
    }
    if (record.values.length !== record.numRows * store.dim) {
      throw new Error(
        `record ${record.id}: ${record.values.length} values for ` +
          `${record.numRows} x ${store.dim}`,
      );
    }
    if (store.unit === Unit.HEAD && record.numRows !== 1) {
      throw new Error(`head record ${record.id} must have exactly one row`);
    }
    for (const v of record.values) {
      if (!Number.isFinite(v)) {
        throw new Error(`record ${record.id} contains a non-finite value`);
      }
    }
    const head = Buffer.alloc(6);
    head.writeUInt32LE(record.id, 0);
    head.writeUInt16LE(record.numRows, 4);
    const payload = Buffer.alloc(record.values.length * 4);
    for (let i = 0; i < record.values.length; i++) {
      payload.writeFloatLE(record.values[i], i * 4);
    }
    chunks.push(head, payload);
  }
  return Buffer.concat(chunks);
}

/** Atomic write: temp file in the same directory, then rename. */
export function writeStore(filePath: string, store: Store): void {
  const blob = encodeStore(store);
  const tmp = path.join(
    path.dirname(filePath),
    `.${path.basename(filePath)}.tmp`,
  );
  fs.writeFileSync(tmp, blob);
  fs.renameSync(tmp, filePath);
}

export function decodeStore(blob: Buffer): Store {
  if (blob.length < 16) throw new Error("file shorter than the header");
  if (!blob.subarray(0, 4).equals(MAGIC)) {
    throw new Error(`bad magic ${blob.subarray(0, 4).toString("hex")}`);
  }
  const version = blob.readUInt8(4);
  if (version !== VERSION) throw new Error(`unsupported version ${version}`);
  const space = blob.readUInt8(5) as Space;
  const unit = blob.readUInt8(6) as Unit;
  const dim = blob.readUInt32LE(8);
  const count = blob.readUInt32LE(12);
  if (dim === 0) throw new Error("header dim is 0");
  let offset = 16;
  const records: StoreRecord[] = [];
  for (let i = 0; i < count; i++) {
    if (offset + 6 > blob.length) throw new Error("record header past end");
    const id = blob.readUInt32LE(offset);
    const numRows = blob.readUInt16LE(offset + 4);
    offset += 6;
    const n = numRows * dim;
    if (offset + n * 4 > blob.length) {
      throw new Error(`record ${id} payload truncated`);
    }
    const values = new Float32Array(n);
    for (let j = 0; j < n; j++) {
      values[j] = blob.readFloatLE(offset + j * 4);
    }
    offset += n * 4;
    records.push({ id, numRows, values });
  }
  if (offset !== blob.length) {
    throw new Error(`${blob.length - offset} trailing bytes`);
  }
  return { space, unit, dim, records };
}

export function readStore(filePath: string): Store {
  return decodeStore(fs.readFileSync(filePath));
}
